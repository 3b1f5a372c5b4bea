#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "ffradon/rng.hpp"
#include "ffradon/transforms.hpp"

using namespace ffradon;

namespace {

GridFunction random_complex_grid(std::shared_ptr<const FieldCtx> ctx, int d, Rng& rng) {
    GridFunction f = grid_constant(std::move(ctx), d, 0.0);
    for (auto& v : f.values)
        v = {2 * rng.unit() - 1, 2 * rng.unit() - 1};
    return f;
}

GridFunction random_nonneg_grid(std::shared_ptr<const FieldCtx> ctx, int d, Rng& rng) {
    GridFunction f = grid_constant(std::move(ctx), d, 0.0);
    for (auto& v : f.values) v = rng.unit();
    return f;
}

std::complex<double> pair_grid(const GridFunction& f, const GridFunction& g) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += f.values[i] * std::conj(g.values[i]);
    return acc / static_cast<double>(f.values.size());
}

std::complex<double> pair_planes(const PlaneFunction& F, const PlaneFunction& G) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < F.values.size(); ++i)
        acc += F.values[i] * std::conj(G.values[i]);
    return acc / static_cast<double>(F.values.size());
}

} // namespace

TEST_CASE("transform of the constant function is constant") {
    for (auto [p, d, k] : {std::tuple<std::uint32_t, int, int>{3, 2, 1}, {2, 3, 1}, {2, 3, 2}}) {
        auto fam = PlaneFamily::build(make_field(p, 1), d, k);
        auto tf = kplane_transform(grid_constant(fam->ctx(), d, 1.0), fam);
        for (auto v : tf.values) CHECK(std::abs(v - 1.0) < 1e-12);
    }
}

TEST_CASE("transform of a point mass") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    auto tf = kplane_transform(grid_indicator(fam->ctx(), 2, {4}), fam); // point (1,1)
    int hits = 0;
    for (std::size_t w = 0; w < tf.values.size(); ++w) {
        bool through = incident(fam->field(), fam->flats()[w], Point{{1, 1}});
        if (through) {
            ++hits;
            CHECK(std::abs(tf.values[w] - 1.0 / 3) < 1e-12);
        } else {
            CHECK(std::abs(tf.values[w]) < 1e-12);
        }
    }
    CHECK(hits == 4);
}

TEST_CASE("X-ray of a line indicator in F_2^2") {
    auto fam = PlaneFamily::build(make_field(2, 1), 2, 1);
    REQUIRE(fam->size() == 6);
    // w0 = the x-axis: points (0,0) and (1,0), ranks 0 and 1
    auto tf = kplane_transform(grid_indicator(fam->ctx(), 2, {0, 1}), fam);
    int ones = 0, zeros = 0, halves = 0;
    for (auto v : tf.values) {
        if (std::abs(v - 1.0) < 1e-12) ++ones;
        else if (std::abs(v) < 1e-12) ++zeros;
        else if (std::abs(v - 0.5) < 1e-12) ++halves;
    }
    CHECK(ones == 1);   // the line itself
    CHECK(zeros == 1);  // its parallel
    CHECK(halves == 4); // everything else crosses in one point
}

TEST_CASE("adjoint satisfies the duality pairing") {
    Rng rng(7);
    for (auto [p, d, k] : {std::tuple<std::uint32_t, int, int>{3, 2, 1}, {2, 3, 2}, {5, 2, 1}}) {
        auto fam = PlaneFamily::build(make_field(p, 1), d, k);
        for (int trial = 0; trial < 20; ++trial) {
            GridFunction f = random_complex_grid(fam->ctx(), d, rng);
            PlaneFunction g;
            g.family = fam;
            g.values.resize(fam->size());
            for (auto& v : g.values) v = {2 * rng.unit() - 1, 2 * rng.unit() - 1};
            auto lhs = pair_planes(kplane_transform(f, fam), g);
            auto rhs = pair_grid(f, adjoint_kplane(g));
            CHECK(std::abs(lhs - rhs) < 1e-12);
        }
    }
}

TEST_CASE("adjoint of the constant plane function is constant") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    PlaneFunction g;
    g.family = fam;
    g.values.assign(fam->size(), 1.0);
    auto back = adjoint_kplane(g);
    for (auto v : back.values) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("adjoint of a single-plane indicator is supported on that plane") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    PlaneFunction g;
    g.family = fam;
    g.values.assign(fam->size(), 0.0);
    g.values[5] = 1.0;
    auto back = adjoint_kplane(g);
    auto on_plane = fam->points_of(5);
    for (std::uint32_t x = 0; x < back.values.size(); ++x) {
        bool member = std::find(on_plane.begin(), on_plane.end(), x) != on_plane.end();
        if (member)
            CHECK(std::abs(back.values[x]) > 1e-12);
        else
            CHECK(std::abs(back.values[x]) < 1e-12);
    }
}

TEST_CASE("linearity, positivity, averaging") {
    Rng rng(11);
    auto fam = PlaneFamily::build(make_field(5, 1), 2, 1);
    for (int trial = 0; trial < 10; ++trial) {
        GridFunction f = random_complex_grid(fam->ctx(), 2, rng);
        GridFunction g = random_complex_grid(fam->ctx(), 2, rng);
        std::complex<double> a{rng.unit(), rng.unit()}, b{rng.unit(), rng.unit()};
        GridFunction combo = grid_constant(fam->ctx(), 2, 0.0);
        for (std::size_t i = 0; i < combo.values.size(); ++i)
            combo.values[i] = a * f.values[i] + b * g.values[i];
        auto lhs = kplane_transform(combo, fam);
        auto tf = kplane_transform(f, fam);
        auto tg = kplane_transform(g, fam);
        for (std::size_t w = 0; w < lhs.values.size(); ++w)
            CHECK(std::abs(lhs.values[w] - (a * tf.values[w] + b * tg.values[w])) < 1e-12);
    }
    for (int trial = 0; trial < 10; ++trial) {
        GridFunction f = random_nonneg_grid(fam->ctx(), 2, rng);
        double lo = 1e300, hi = -1e300;
        for (auto v : f.values) {
            lo = std::min(lo, v.real());
            hi = std::max(hi, v.real());
        }
        auto tf = kplane_transform(f, fam);
        for (auto v : tf.values) {
            CHECK(v.real() >= 0.0);
            CHECK(v.real() >= lo - 1e-12);
            CHECK(v.real() <= hi + 1e-12);
        }
    }
}

TEST_CASE("geometric split reconstructs the Radon transform exactly") {
    Rng rng(13);
    for (auto [p, d] : {std::pair<std::uint32_t, int>{3, 2}, {5, 2}, {3, 3}}) {
        auto fam = PlaneFamily::build(make_field(p, 1), d, d - 1);
        for (int trial = 0; trial < 20; ++trial) {
            GridFunction f = random_complex_grid(fam->ctx(), d, rng);
            auto [t0, t1] = radon_geometric_split(f, fam);
            auto full = kplane_transform(f, fam);
            for (std::size_t w = 0; w < full.values.size(); ++w) {
                CHECK(std::abs(t0.values[w] + t1.values[w] - full.values[w]) < 1e-12);
                if (fam->kind(w) == HyperplaneKind::Theta)
                    CHECK(std::abs(t1.values[w]) == 0.0);
                else
                    CHECK(std::abs(t0.values[w]) == 0.0);
            }
        }
    }
}

TEST_CASE("geometric split of simple functions") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    auto [t0c, t1c] = radon_geometric_split(grid_constant(fam->ctx(), 2, 1.0), fam);
    for (std::size_t w = 0; w < fam->size(); ++w) {
        bool theta = fam->kind(w) == HyperplaneKind::Theta;
        CHECK(std::abs(t0c.values[w] - (theta ? 1.0 : 0.0)) < 1e-12);
        CHECK(std::abs(t1c.values[w] - (theta ? 0.0 : 1.0)) < 1e-12);
    }
    auto [t0d, t1d] = radon_geometric_split(grid_indicator(fam->ctx(), 2, {0}), fam);
    for (std::size_t w = 0; w < fam->size(); ++w) {
        CHECK(std::abs(t1d.values[w]) < 1e-12); // origin only lies on Theta planes
        if (fam->kind(w) == HyperplaneKind::Theta)
            CHECK(std::abs(t0d.values[w] - 1.0 / 3) < 1e-12);
    }
}

TEST_CASE("character parts reconstruct the geometric parts") {
    Rng rng(17);
    for (auto [p, n, d] : {std::tuple<std::uint32_t, std::uint32_t, int>{2, 1, 2},
                           {2, 1, 3},
                           {3, 1, 2},
                           {5, 1, 2},
                           {3, 1, 3},
                           {5, 1, 3},
                           {2, 2, 2},
                           {3, 2, 2}}) {
        auto fam = PlaneFamily::build(make_field(p, n), d, d - 1);
        for (int trial = 0; trial < 10; ++trial) {
            GridFunction f = random_complex_grid(fam->ctx(), d, rng);
            auto [t0, t1] = radon_geometric_split(f, fam);
            auto parts = radon_char_parts(f, fam);
            for (std::size_t w = 0; w < fam->size(); ++w) {
                CHECK(std::abs(parts.t0_star.values[w] + parts.t0_dstar.values[w] -
                               t0.values[w]) < 1e-9);
                CHECK(std::abs(parts.t1_star.values[w] + parts.t1_dstar.values[w] -
                               t1.values[w]) < 1e-9);
            }
        }
    }
}

TEST_CASE("character part values on simple inputs") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    // T0* of an indicator is Theta(w) |E| / q^d
    auto parts = radon_char_parts(grid_indicator(fam->ctx(), 2, {0, 4, 8}), fam);
    for (std::size_t w = 0; w < fam->size(); ++w) {
        double expect = fam->kind(w) == HyperplaneKind::Theta ? 3.0 / 9 : 0.0;
        CHECK(std::abs(parts.t0_star.values[w] - expect) < 1e-12);
    }
    // T0** of the origin mass: (q-1)/q^d on every Theta plane
    auto parts0 = radon_char_parts(grid_indicator(fam->ctx(), 2, {0}), fam);
    for (std::size_t w = 0; w < fam->size(); ++w)
        if (fam->kind(w) == HyperplaneKind::Theta)
            CHECK(std::abs(parts0.t0_dstar.values[w] - 2.0 / 9) < 1e-12);
}

TEST_CASE("theta-side operators only depend on the line of the dual") {
    Rng rng(23);
    for (auto [p, d] : {std::pair<std::uint32_t, int>{5, 2}, {3, 3}}) {
        auto fam = PlaneFamily::build(make_field(p, 1), d, d - 1);
        const FieldCtx& F = fam->field();
        for (int trial = 0; trial < 5; ++trial) {
            GridFunction f = random_complex_grid(fam->ctx(), d, rng);
            auto base = radon_char_parts(f, fam);
            // rescale every Theta dual by an independent nonzero t
            std::vector<std::vector<Elem>> duals = fam->duals();
            for (std::size_t w = 0; w < duals.size(); ++w) {
                if (fam->kind(w) != HyperplaneKind::Theta) continue;
                Elem t = static_cast<Elem>(1 + rng.below(F.q() - 1));
                for (auto& c : duals[w]) c = F.mul(t, c);
            }
            auto scaled = radon_char_parts(f, fam, &duals);
            for (std::size_t w = 0; w < fam->size(); ++w) {
                CHECK(std::abs(scaled.t0_star.values[w] - base.t0_star.values[w]) < 1e-9);
                CHECK(std::abs(scaled.t0_dstar.values[w] - base.t0_dstar.values[w]) < 1e-9);
            }
        }
    }
}

TEST_CASE("transform and adjoint preserve positivity from a point mass") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    GridFunction f = grid_indicator(fam->ctx(), 2, {4});
    PlaneFunction tf = kplane_transform(f, fam);
    PlaneFunction powered;
    powered.family = fam;
    powered.values.resize(tf.values.size());
    for (std::size_t w = 0; w < tf.values.size(); ++w)
        powered.values[w] = std::pow(tf.values[w].real(), 2.0);
    GridFunction back = adjoint_kplane(powered);
    double total = 0;
    for (auto v : back.values) {
        CHECK(v.real() >= 0.0);
        CHECK(v.imag() == 0.0);
        total += v.real();
    }
    CHECK(total > 0.0);
}

TEST_CASE("dimension mismatches are rejected") {
    auto fam = PlaneFamily::build(make_field(3, 1), 2, 1);
    auto other = make_field(5, 1);
    GridFunction f = grid_constant(other, 2, 1.0);
    CHECK_THROWS_MATCHES(kplane_transform(f, fam), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::DimensionMismatch;
                         }));
    GridFunction g = grid_constant(fam->ctx(), 2, 1.0);
    CHECK_THROWS_AS(radon_char_parts(g, PlaneFamily::build(make_field(3, 1), 3, 1)), Error);
}
