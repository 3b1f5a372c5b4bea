#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ffradon/errors.hpp"
#include "ffradon/numeric.hpp"
#include "ffradon/rational.hpp"
#include "ffradon/transforms.hpp"

namespace ffradon {

/// Lebesgue exponent in [1, infinity]. Finite values are exact rationals so
/// that endpoint geometry (hull membership, vertex exponents) never suffers
/// floating drift; norm evaluation converts to double.
class Exponent {
public:
    static Exponent infinity() {
        Exponent e;
        e.inf_ = true;
        return e;
    }

    static Exponent from_rational(long long num, long long den) {
        Rational r(num, den);
        if (r.num < r.den || r.num <= 0)
            raise(Errc::BadExponent, "exponent " + r.str() + " is below 1");
        Exponent e;
        e.rat_ = r;
        return e;
    }

    static Exponent from_int(long long v) { return from_rational(v, 1); }

    /// Accepts "a/b", an integer literal, or "inf".
    static Exponent parse(std::string_view s) {
        if (s == "inf" || s == "Inf" || s == "INF") return infinity();
        auto slash = s.find('/');
        try {
            if (slash == std::string_view::npos)
                return from_int(std::stoll(std::string(s)));
            long long num = std::stoll(std::string(s.substr(0, slash)));
            long long den = std::stoll(std::string(s.substr(slash + 1)));
            return from_rational(num, den);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            raise(Errc::ParseError, "cannot parse exponent '" + std::string(s) + "'");
        }
    }

    bool is_infinite() const { return inf_; }
    double value() const {
        return inf_ ? std::numeric_limits<double>::infinity() : rat_.to_double();
    }
    const Rational& rat() const {
        if (inf_) raise(Errc::BadExponent, "infinite exponent has no rational value");
        return rat_;
    }
    /// 1/p as an exact rational; 0 for p = infinity.
    Rational reciprocal() const { return inf_ ? Rational(0, 1) : Rational(rat_.den, rat_.num); }

    std::string str() const { return inf_ ? "inf" : rat_.str(); }

    friend bool operator==(const Exponent& a, const Exponent& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
        return a.rat_ == b.rat_;
    }

private:
    Exponent() = default;
    bool inf_ = false;
    Rational rat_{1, 1};
};

/// Vertex exponents p = (d+1)/(k+1), r = d+1.
inline Exponent vertex_p(int d, int k) { return Exponent::from_rational(d + 1, k + 1); }
inline Exponent vertex_r(int d) { return Exponent::from_int(d + 1); }

namespace detail {

inline double mean_power_norm(const std::vector<std::complex<double>>& values,
                              const Exponent& p) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double pe = p.value();
    KahanSum acc;
    for (const auto& v : values) {
        double a = std::abs(v);
        if (a != 0.0) acc.add(std::pow(a, pe));
    }
    return std::pow(acc.value() / static_cast<double>(values.size()), 1.0 / pe);
}

} // namespace detail

/// L^p norm under the normalized counting measure on F_q^d.
inline double lp_norm(const GridFunction& f, const Exponent& p) {
    return detail::mean_power_norm(f.values, p);
}

/// L^r norm under the normalized surface measure on Pi_k.
inline double lr_norm_planes(const PlaneFunction& F, const Exponent& r) {
    return detail::mean_power_norm(F.values, r);
}

/// Lorentz L^{p,1} norm of an indicator under normalized measure:
/// (|E|/q^d)^{1/p}.
inline double restricted_norm_indicator(const FieldCtx& F, int d,
                                        const std::vector<std::uint32_t>& set,
                                        const Exponent& p) {
    if (set.empty()) raise(Errc::EmptySet, "restricted norm of an empty set");
    double frac = static_cast<double>(set.size()) / static_cast<double>(grid_size(F, d));
    if (p.is_infinite()) return 1.0;
    return std::pow(frac, 1.0 / p.value());
}

/// ||T_{Pi_k} f||_{L^r} / ||f||_{L^p}.
inline double norm_ratio(const GridFunction& f, const std::shared_ptr<const PlaneFamily>& fam,
                         const Exponent& p, const Exponent& r) {
    bool nonzero = false;
    for (const auto& v : f.values)
        if (v != 0.0) {
            nonzero = true;
            break;
        }
    if (!nonzero) raise(Errc::ZeroFunction, "norm ratio of the zero function");
    return lr_norm_planes(kplane_transform(f, fam), r) / lp_norm(f, p);
}

} // namespace ffradon
