#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "ffradon/field.hpp"

using namespace ffradon;

namespace {
constexpr double kTiny = 1e-12;
}

TEST_CASE("prime field construction and arithmetic") {
    auto F5 = make_field(5, 1);
    REQUIRE(F5->q() == 5);
    CHECK(F5->inv(3) == 2); // 3*2 = 6 = 1 mod 5
    CHECK(F5->mul(3, F5->inv(3)) == 1);
    CHECK(F5->add(4, 3) == 2);
    CHECK(F5->sub(1, 3) == 3);
    CHECK(F5->pow(2, 4) == 1);

    auto F3 = make_field(3, 1);
    CHECK(F3->neg(0) == 0);
    CHECK(F3->neg(1) == 2);
}

TEST_CASE("rejects non-prime characteristic") {
    CHECK_THROWS_MATCHES(make_field(6, 1), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::NotPrime;
                         }));
    CHECK_THROWS_AS(make_field(1, 1), Error);
}

TEST_CASE("modulus validation") {
    // t^2 + 1 has no root mod 3, so F_9 accepts it
    CHECK_NOTHROW(make_field(3, 2, std::vector<Elem>{1, 0, 1}));
    // t^2 + 1 = (t+1)^2 over F_2
    CHECK_THROWS_MATCHES(make_field(2, 2, std::vector<Elem>{1, 0, 1}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::ReducibleModulus;
                         }));
}

TEST_CASE("size cap") {
    SizeCaps caps;
    caps.max_q = 64;
    CHECK_THROWS_MATCHES(make_field(2, 7, std::nullopt, caps), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::SizeCapExceeded;
                         }));
}

TEST_CASE("default modulus is the first irreducible in code order") {
    // over F_3 the candidates below t^2+1 are t^2 (root 0), so t^2+1 wins
    auto F9 = make_field(3, 2);
    CHECK(F9->modulus() == std::vector<Elem>{1, 0, 1});
    // over F_2: t^2, t^2+1 reducible; t^2+t = t(t+1); default is t^2+t+1
    auto F4 = make_field(2, 2);
    CHECK(F4->modulus() == std::vector<Elem>{1, 1, 1});
}

TEST_CASE("extension field inverse") {
    // F_4 = F_2[t]/(t^2+t+1): t * (t+1) = t^2+t = 1
    auto F4 = make_field(2, 2);
    Elem t = 2;      // code of t
    Elem t1 = 3;     // code of t+1
    CHECK(F4->mul(t, t1) == 1);
    CHECK(F4->inv(t) == t1);
    CHECK_THROWS_MATCHES(F4->inv(0), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::DivisionByZero;
                         }));
}

TEST_CASE("absolute trace") {
    auto F9 = make_field(3, 2, std::vector<Elem>{1, 0, 1});
    Elem t = 3; // code of t in base-3 digits
    CHECK(F9->trace(t) == 0);  // t + t^3 = t - t
    CHECK(F9->trace(1) == 2);  // 1 + 1
    auto F7 = make_field(7, 1);
    for (Elem a = 0; a < 7; ++a) CHECK(F7->trace(a) == a);
}

TEST_CASE("additive character basics") {
    auto F3 = make_field(3, 1);
    CHECK(std::abs(F3->chi(0) - std::complex<double>(1, 0)) < kTiny);
    std::complex<double> omega = std::exp(std::complex<double>(0, 2 * std::numbers::pi / 3));
    CHECK(std::abs(F3->chi(1) - omega) < kTiny);

    auto F5 = make_field(5, 1);
    std::complex<double> s = 0;
    for (Elem x = 0; x < 5; ++x) s += F5->chi(F5->mul(2, x));
    CHECK(std::abs(s) < kTiny);
}

TEST_CASE("field axioms hold exhaustively on small fields") {
    for (std::uint32_t q : {2u, 3u, 4u, 5u, 7u, 8u, 9u, 13u, 16u, 25u, 27u, 49u, 64u}) {
        std::uint32_t p = q;
        std::uint32_t n = 1;
        for (std::uint32_t f = 2; f < q; ++f)
            if (q % f == 0) {
                p = f;
                n = 0;
                std::uint32_t m = q;
                while (m > 1) {
                    m /= f;
                    ++n;
                }
                break;
            }
        auto F = make_field(p, n);
        INFO("q = " << q);
        for (Elem a = 0; a < q; ++a) {
            CHECK(F->add(a, F->neg(a)) == 0);
            if (a != 0) CHECK(F->mul(a, F->inv(a)) == 1);
            for (Elem b = 0; b < q; ++b) {
                CHECK(F->add(a, b) == F->add(b, a));
                CHECK(F->mul(a, b) == F->mul(b, a));
                for (Elem c = 0; c < q; ++c) {
                    REQUIRE(F->add(F->add(a, b), c) == F->add(a, F->add(b, c)));
                    REQUIRE(F->mul(F->mul(a, b), c) == F->mul(a, F->mul(b, c)));
                    REQUIRE(F->mul(a, F->add(b, c)) == F->add(F->mul(a, b), F->mul(a, c)));
                }
            }
        }
    }
}

TEST_CASE("trace is additive and character is multiplicative over addition") {
    for (auto [p, n] : {std::pair<std::uint32_t, std::uint32_t>{2, 5},
                        {3, 3},
                        {5, 2},
                        {7, 2},
                        {2, 6}}) {
        auto F = make_field(p, n);
        INFO("q = " << F->q());
        for (Elem a = 0; a < F->q(); ++a)
            for (Elem b = 0; b < F->q(); ++b) {
                CHECK(F->trace(F->add(a, b)) == (F->trace(a) + F->trace(b)) % p);
                CHECK(std::abs(F->chi(F->add(a, b)) - F->chi(a) * F->chi(b)) < kTiny);
            }
    }
}

TEST_CASE("character orthogonality") {
    for (auto [p, n] : {std::pair<std::uint32_t, std::uint32_t>{2, 1},
                        {3, 1},
                        {2, 2},
                        {5, 1},
                        {7, 1},
                        {2, 3},
                        {3, 2},
                        {13, 1},
                        {2, 6}}) {
        auto F = make_field(p, n);
        INFO("q = " << F->q());
        for (Elem a = 0; a < F->q(); ++a) {
            std::complex<double> s = 0;
            for (Elem x = 0; x < F->q(); ++x) s += F->chi(F->mul(a, x));
            if (a == 0)
                CHECK(std::abs(s - std::complex<double>(F->q(), 0)) < 1e-9);
            else
                CHECK(std::abs(s) < 1e-9 * F->q());
        }
    }
}

TEST_CASE("element codes round-trip through digits") {
    auto F27 = make_field(3, 3);
    for (Elem a = 0; a < 27; ++a) {
        // decompose and recompose
        Elem digits[3] = {a % 3, (a / 3) % 3, (a / 9) % 3};
        CHECK(digits[0] + 3 * digits[1] + 9 * digits[2] == a);
    }
}
