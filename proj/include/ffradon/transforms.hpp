#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "ffradon/errors.hpp"
#include "ffradon/field.hpp"
#include "ffradon/geometry.hpp"

namespace ffradon {

/// Dense complex-valued function on (F_q^d, dx), indexed by point rank.
struct GridFunction {
    std::shared_ptr<const FieldCtx> ctx;
    int d = 0;
    std::vector<std::complex<double>> values;

    std::uint64_t size() const { return values.size(); }
};

inline GridFunction grid_constant(std::shared_ptr<const FieldCtx> ctx, int d,
                                  std::complex<double> value) {
    GridFunction f;
    f.ctx = std::move(ctx);
    f.d = d;
    f.values.assign(grid_size(*f.ctx, d), value);
    return f;
}

inline GridFunction grid_indicator(std::shared_ptr<const FieldCtx> ctx, int d,
                                   const std::vector<std::uint32_t>& ranks) {
    GridFunction f = grid_constant(std::move(ctx), d, 0.0);
    for (std::uint32_t r : ranks) {
        if (r >= f.values.size()) raise(Errc::BadConfig, "point rank out of range");
        f.values[r] = 1.0;
    }
    return f;
}

/// The enumerated family Pi_k for one (q, d, k), with incidence tables both
/// ways. For k = d-1 it also carries the H/Theta duals and the cached
/// character sums K[a] = sum_{s != 0} chi(s*a) used by the character-side
/// decomposition. Immutable shared state; build once per configuration.
class PlaneFamily {
public:
    static std::shared_ptr<const PlaneFamily> build(std::shared_ptr<const FieldCtx> ctx, int d,
                                                    int k) {
        auto fam = std::shared_ptr<PlaneFamily>(new PlaneFamily());
        fam->ctx_ = std::move(ctx);
        fam->d_ = d;
        fam->k_ = k;
        const FieldCtx& F = *fam->ctx_;
        fam->num_points_ = grid_size(F, d);
        // the incidence tables hold |Pi_k| * q^k entries; keep them under the
        // same cap that bounds the grid
        std::uint64_t entries = kplane_family_size(F, d, k);
        for (int i = 0; i < k; ++i) entries = detail::sat_mul(entries, F.q());
        if (entries > F.caps().max_points)
            raise(Errc::SizeCapExceeded, "incidence tables exceed the point cap");
        fam->flats_ = enumerate_kplanes(F, d, k);

        fam->coords_.resize(fam->num_points_ * d);
        for (std::uint64_t r = 0; r < fam->num_points_; ++r) {
            std::uint64_t v = r;
            for (int i = 0; i < d; ++i) {
                fam->coords_[r * d + i] = static_cast<Elem>(v % F.q());
                v /= F.q();
            }
        }

        fam->flat_points_.reserve(fam->flats_.size());
        fam->point_flats_.assign(fam->num_points_, {});
        for (std::size_t w = 0; w < fam->flats_.size(); ++w) {
            fam->flat_points_.push_back(flat_point_ranks(F, fam->flats_[w]));
            for (std::uint32_t r : fam->flat_points_.back())
                fam->point_flats_[r].push_back(static_cast<std::uint32_t>(w));
        }

        if (k == d - 1) {
            auto duals = hyperplane_duals(F, fam->flats_);
            fam->kinds_.reserve(duals.size());
            fam->duals_.reserve(duals.size());
            for (auto& hd : duals) {
                fam->kinds_.push_back(hd.kind);
                fam->duals_.push_back(std::move(hd.dual.coords));
            }
            fam->chi_sum_nonzero_.resize(F.q());
            for (Elem a = 0; a < F.q(); ++a) {
                std::complex<double> acc = 0.0;
                for (Elem s = 1; s < F.q(); ++s) acc += F.chi(F.mul(s, a));
                fam->chi_sum_nonzero_[a] = acc;
            }
        }
        return fam;
    }

    const FieldCtx& field() const { return *ctx_; }
    const std::shared_ptr<const FieldCtx>& ctx() const { return ctx_; }
    int d() const { return d_; }
    int k() const { return k_; }
    std::uint64_t num_points() const { return num_points_; }
    std::size_t size() const { return flats_.size(); }
    const std::vector<Flat>& flats() const { return flats_; }
    const std::vector<std::uint32_t>& points_of(std::size_t w) const { return flat_points_[w]; }
    const std::vector<std::uint32_t>& flats_through(std::uint32_t rank) const {
        return point_flats_[rank];
    }
    const Elem* point_coords(std::uint32_t rank) const { return &coords_[std::uint64_t{rank} * d_]; }

    bool is_radon() const { return k_ == d_ - 1; }
    HyperplaneKind kind(std::size_t w) const { return kinds_[w]; }
    const std::vector<Elem>& dual(std::size_t w) const { return duals_[w]; }
    const std::vector<std::vector<Elem>>& duals() const { return duals_; }
    /// K[a] = sum over nonzero s of chi(s*a), evaluated numerically.
    std::complex<double> chi_sum_nonzero(Elem a) const { return chi_sum_nonzero_[a]; }

    std::uint64_t theta_count() const {
        std::uint64_t n = 0;
        for (auto kd : kinds_)
            if (kd == HyperplaneKind::Theta) ++n;
        return n;
    }

private:
    PlaneFamily() = default;

    std::shared_ptr<const FieldCtx> ctx_;
    int d_ = 0, k_ = 0;
    std::uint64_t num_points_ = 0;
    std::vector<Flat> flats_;
    std::vector<std::vector<std::uint32_t>> flat_points_;
    std::vector<std::vector<std::uint32_t>> point_flats_;
    std::vector<Elem> coords_;
    std::vector<HyperplaneKind> kinds_;
    std::vector<std::vector<Elem>> duals_;
    std::vector<std::complex<double>> chi_sum_nonzero_;
};

/// Function on the enumerated family Pi_k under normalized surface measure.
struct PlaneFunction {
    std::shared_ptr<const PlaneFamily> family;
    std::vector<std::complex<double>> values;

    std::size_t size() const { return values.size(); }
};

namespace detail {

inline void check_compatible(const GridFunction& f, const PlaneFamily& fam) {
    if (!f.ctx || f.d != fam.d() || !f.ctx->same_field(fam.field()))
        raise(Errc::DimensionMismatch, "function and plane family disagree on (q, d)");
    if (f.values.size() != fam.num_points())
        raise(Errc::DimensionMismatch, "grid function has wrong length");
}

} // namespace detail

/// T f(w) = q^{-k} sum_{x in w} f(x). k = 1 is the X-ray transform,
/// k = d-1 the Radon transform.
inline PlaneFunction kplane_transform(const GridFunction& f,
                                      const std::shared_ptr<const PlaneFamily>& fam) {
    detail::check_compatible(f, *fam);
    double scale = 1.0;
    for (int i = 0; i < fam->k(); ++i) scale /= fam->field().q();
    PlaneFunction out;
    out.family = fam;
    out.values.resize(fam->size());
    for (std::size_t w = 0; w < fam->size(); ++w) {
        std::complex<double> acc = 0.0;
        for (std::uint32_t r : fam->points_of(w)) acc += f.values[r];
        out.values[w] = acc * scale;
    }
    return out;
}

/// Adjoint under the normalized pairings: <Tf, G>_{dsigma} = <f, adjoint(G)>_{dx}.
inline GridFunction adjoint_kplane(const PlaneFunction& G) {
    const PlaneFamily& fam = *G.family;
    if (G.values.size() != fam.size())
        raise(Errc::DimensionMismatch, "plane function has wrong length");
    double scale = static_cast<double>(fam.num_points()) / static_cast<double>(fam.size());
    for (int i = 0; i < fam.k(); ++i) scale /= fam.field().q();
    GridFunction out;
    out.ctx = fam.ctx();
    out.d = fam.d();
    out.values.assign(fam.num_points(), 0.0);
    for (std::uint32_t r = 0; r < fam.num_points(); ++r) {
        std::complex<double> acc = 0.0;
        for (std::uint32_t w : fam.flats_through(r)) acc += G.values[w];
        out.values[r] = acc * scale;
    }
    return out;
}

/// Radon transform split along the H/Theta geometry: T0 f is supported on
/// the planes through the origin, T1 f on the rest, and T0 f + T1 f
/// reproduces the full transform exactly.
inline std::pair<PlaneFunction, PlaneFunction> radon_geometric_split(
    const GridFunction& f, const std::shared_ptr<const PlaneFamily>& fam) {
    if (!fam->is_radon()) raise(Errc::DimensionMismatch, "geometric split needs k = d-1");
    PlaneFunction full = kplane_transform(f, fam);
    PlaneFunction t0, t1;
    t0.family = fam;
    t1.family = fam;
    t0.values.assign(fam->size(), 0.0);
    t1.values.assign(fam->size(), 0.0);
    for (std::size_t w = 0; w < fam->size(); ++w) {
        if (fam->kind(w) == HyperplaneKind::Theta)
            t0.values[w] = full.values[w];
        else
            t1.values[w] = full.values[w];
    }
    return {std::move(t0), std::move(t1)};
}

struct RadonCharParts {
    PlaneFunction t0_star, t0_dstar; // Theta side: mean part + oscillatory part
    PlaneFunction t1_star, t1_dstar; // H side
};

/// Character-sum decomposition of the Radon transform. For w in Theta with
/// dual w':
///   T0*  f(w) = q^{-d} sum_x f(x)
///   T0** f(w) = q^{-d} sum_x K(w'.x) f(x)
/// and on H the same with K(w'.x - 1), where K(a) = sum_{s != 0} chi(s*a).
/// Star + double-star reconstructs the geometric part up to rounding.
/// The duals argument allows substituting rescaled Theta representatives.
inline RadonCharParts radon_char_parts(const GridFunction& f,
                                       const std::shared_ptr<const PlaneFamily>& fam,
                                       const std::vector<std::vector<Elem>>* duals_override =
                                           nullptr) {
    detail::check_compatible(f, *fam);
    if (!fam->is_radon()) raise(Errc::DimensionMismatch, "character split needs k = d-1");
    const FieldCtx& F = fam->field();
    const int d = fam->d();
    const auto& duals = duals_override ? *duals_override : fam->duals();
    if (duals.size() != fam->size())
        raise(Errc::DimensionMismatch, "dual table has wrong length");

    double inv_qd = 1.0;
    for (int i = 0; i < d; ++i) inv_qd /= F.q();

    std::complex<double> total = 0.0;
    std::vector<std::uint32_t> support;
    support.reserve(f.values.size());
    for (std::uint32_t r = 0; r < f.values.size(); ++r) {
        if (f.values[r] != 0.0) {
            support.push_back(r);
            total += f.values[r];
        }
    }

    RadonCharParts parts;
    for (PlaneFunction* pf : {&parts.t0_star, &parts.t0_dstar, &parts.t1_star, &parts.t1_dstar}) {
        pf->family = fam;
        pf->values.assign(fam->size(), 0.0);
    }

    for (std::size_t w = 0; w < fam->size(); ++w) {
        const std::vector<Elem>& wp = duals[w];
        const bool theta = fam->kind(w) == HyperplaneKind::Theta;
        std::complex<double> osc = 0.0;
        for (std::uint32_t r : support) {
            const Elem* x = fam->point_coords(r);
            Elem dot = 0;
            for (int i = 0; i < d; ++i) dot = F.add(dot, F.mul(wp[i], x[i]));
            if (!theta) dot = F.sub(dot, 1);
            osc += fam->chi_sum_nonzero(dot) * f.values[r];
        }
        if (theta) {
            parts.t0_star.values[w] = total * inv_qd;
            parts.t0_dstar.values[w] = osc * inv_qd;
        } else {
            parts.t1_star.values[w] = total * inv_qd;
            parts.t1_dstar.values[w] = osc * inv_qd;
        }
    }
    return parts;
}

} // namespace ffradon
