#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ffradon/errors.hpp"

namespace ffradon {

/// Field element code in [0, q). Codes are base-p digit encodings of the
/// polynomial representation: code = sum c_i * p^i for the residue
/// sum c_i * t^i mod the field modulus.
using Elem = std::uint32_t;

struct SizeCaps {
    std::uint64_t max_q = 1024;
    std::uint64_t max_points = std::uint64_t{1} << 24; // cap on q^d and on |Pi_k|
};

/// A concrete finite field F_q, q = p^n, with exact table-driven arithmetic,
/// the absolute trace and the canonical additive character
/// chi(a) = exp(2*pi*i*Tr(a)/p). Immutable after construction, safe to share.
class FieldCtx {
public:
    std::uint32_t p() const { return p_; }
    std::uint32_t n() const { return n_; }
    std::uint32_t q() const { return q_; }
    const std::vector<Elem>& modulus() const { return modulus_; }
    const SizeCaps& caps() const { return caps_; }

    Elem add(Elem a, Elem b) const { return add_[static_cast<std::size_t>(a) * q_ + b]; }
    Elem mul(Elem a, Elem b) const { return mul_[static_cast<std::size_t>(a) * q_ + b]; }
    Elem neg(Elem a) const { return neg_[a]; }
    Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

    Elem inv(Elem a) const {
        if (a == 0) raise(Errc::DivisionByZero, "inverse of zero in F_" + std::to_string(q_));
        return inv_[a];
    }
    Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

    Elem pow(Elem a, std::uint64_t e) const {
        Elem acc = 1;
        Elem base = a;
        while (e > 0) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }

    /// Absolute trace Tr(a) = a + a^p + ... + a^{p^(n-1)}, as an integer in [0, p).
    std::uint32_t trace(Elem a) const { return trace_[a]; }

    /// Canonical additive character chi(a) = exp(2*pi*i*Tr(a)/p).
    std::complex<double> chi(Elem a) const { return chi_[a]; }

    bool same_field(const FieldCtx& other) const {
        return p_ == other.p_ && n_ == other.n_ && modulus_ == other.modulus_;
    }

    friend std::shared_ptr<const FieldCtx> make_field(std::uint32_t p, std::uint32_t n,
                                                      std::optional<std::vector<Elem>> modulus,
                                                      SizeCaps caps);

private:
    FieldCtx() = default;

    std::uint32_t p_ = 0, n_ = 0, q_ = 0;
    std::vector<Elem> modulus_; // length n+1, monic; {0} placeholder for n == 1
    SizeCaps caps_;
    std::vector<std::uint16_t> add_, mul_;
    std::vector<std::uint16_t> neg_, inv_;
    std::vector<std::uint16_t> trace_;
    std::vector<std::complex<double>> chi_;
};

namespace detail {

inline bool is_prime(std::uint64_t m) {
    if (m < 2) return false;
    for (std::uint64_t f = 2; f * f <= m; ++f)
        if (m % f == 0) return false;
    return true;
}

// dense polynomials over F_p, little-endian coefficients
using Poly = std::vector<std::uint32_t>;

inline void poly_trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
    poly_trim(a);
    std::size_t dm = m.size() - 1;
    std::uint32_t lead_inv = 1;
    // moduli here are monic, but keep the general reduction
    for (std::uint32_t x = 1; x < p; ++x)
        if (m.back() * x % p == 1) {
            lead_inv = x;
            break;
        }
    while (a.size() > dm) {
        std::uint32_t c = static_cast<std::uint32_t>(
            static_cast<std::uint64_t>(a.back()) * lead_inv % p);
        std::size_t shift = a.size() - 1 - dm;
        if (c != 0) {
            for (std::size_t i = 0; i <= dm; ++i) {
                std::uint64_t sub = static_cast<std::uint64_t>(c) * m[i] % p;
                std::uint64_t cur = a[i + shift];
                a[i + shift] = static_cast<std::uint32_t>((cur + p - sub) % p);
            }
        }
        a.pop_back();
        poly_trim(a);
        if (a.size() <= dm) break;
    }
    return a;
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
    if (a.empty() || b.empty()) return {};
    Poly prod(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            prod[i + j] = static_cast<std::uint32_t>(
                (prod[i + j] + static_cast<std::uint64_t>(a[i]) * b[j]) % p);
    }
    return poly_mod(std::move(prod), m, p);
}

// true iff `a` is divisible by `b` over F_p (b nonzero)
inline bool poly_divides(const Poly& b, Poly a, std::uint32_t p) {
    poly_trim(a);
    Poly r = poly_mod(std::move(a), b, p);
    return r.empty();
}

inline bool poly_irreducible(const Poly& m, std::uint32_t p) {
    std::size_t n = m.size() - 1;
    if (n < 1) return false;
    // exhaustive trial division by every monic polynomial of degree 1..n/2;
    // q is desk-scale so this is cheap
    for (std::size_t deg = 1; deg * 2 <= n; ++deg) {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < deg; ++i) count *= p;
        for (std::uint64_t code = 0; code < count; ++code) {
            Poly div(deg + 1, 0);
            std::uint64_t c = code;
            for (std::size_t i = 0; i < deg; ++i) {
                div[i] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            div[deg] = 1;
            if (poly_divides(div, m, p)) return false;
        }
    }
    return true;
}

inline Poly elem_to_poly(Elem a, std::uint32_t p, std::uint32_t n) {
    Poly out(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        out[i] = a % p;
        a /= p;
    }
    poly_trim(out);
    return out;
}

inline Elem poly_to_elem(const Poly& a, std::uint32_t p) {
    Elem code = 0;
    std::uint64_t scale = 1;
    for (std::size_t i = 0; i < a.size(); ++i) {
        code += static_cast<Elem>(a[i] * scale);
        scale *= p;
    }
    return code;
}

} // namespace detail

/// Builds F_q for q = p^n. When n > 1 and no modulus is given, the
/// deterministic default is the first monic irreducible polynomial in
/// coefficient-code order, so runs are reproducible. The modulus is a
/// little-endian coefficient list of length n+1 and must be monic.
inline std::shared_ptr<const FieldCtx> make_field(std::uint32_t p, std::uint32_t n,
                                                  std::optional<std::vector<Elem>> modulus = std::nullopt,
                                                  SizeCaps caps = {}) {
    using namespace detail;
    if (!is_prime(p)) raise(Errc::NotPrime, "p = " + std::to_string(p) + " is not prime");
    if (n < 1) raise(Errc::BadConfig, "extension degree must be >= 1");

    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < n; ++i) {
        q *= p;
        if (q > caps.max_q)
            raise(Errc::SizeCapExceeded,
                  "q = p^n exceeds cap " + std::to_string(caps.max_q));
    }

    auto ctx = std::shared_ptr<FieldCtx>(new FieldCtx());
    ctx->p_ = p;
    ctx->n_ = n;
    ctx->q_ = static_cast<std::uint32_t>(q);
    ctx->caps_ = caps;

    Poly mod;
    if (n == 1) {
        ctx->modulus_ = {0, 1}; // t - 0: unused, recorded for completeness
        mod = {0, 1};
    } else if (modulus.has_value()) {
        auto& given = *modulus;
        if (given.size() != n + 1 || given[n] % p != 1)
            raise(Errc::BadConfig, "modulus must be monic of degree n");
        mod.assign(given.begin(), given.end());
        for (auto& c : mod) c %= p;
        if (!poly_irreducible(mod, p))
            raise(Errc::ReducibleModulus, "modulus is reducible over F_" + std::to_string(p));
        ctx->modulus_.assign(mod.begin(), mod.end());
    } else {
        // scan codes of the lower coefficients in ascending order
        std::uint64_t count = 1;
        for (std::uint32_t i = 0; i < n; ++i) count *= p;
        bool found = false;
        for (std::uint64_t code = 0; code < count && !found; ++code) {
            Poly cand(n + 1, 0);
            std::uint64_t c = code;
            for (std::uint32_t i = 0; i < n; ++i) {
                cand[i] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            cand[n] = 1;
            if (poly_irreducible(cand, p)) {
                mod = cand;
                found = true;
            }
        }
        if (!found) raise(Errc::BadConfig, "no irreducible modulus found"); // cannot happen
        ctx->modulus_.assign(mod.begin(), mod.end());
    }

    const std::uint32_t Q = ctx->q_;
    ctx->add_.resize(static_cast<std::size_t>(Q) * Q);
    ctx->mul_.resize(static_cast<std::size_t>(Q) * Q);
    ctx->neg_.resize(Q);
    ctx->inv_.resize(Q);
    ctx->trace_.resize(Q);
    ctx->chi_.resize(Q);

    // addition is digitwise mod p
    for (Elem a = 0; a < Q; ++a) {
        for (Elem b = 0; b <= a; ++b) {
            Elem sum = 0;
            std::uint64_t scale = 1;
            Elem x = a, y = b;
            for (std::uint32_t i = 0; i < n; ++i) {
                sum += static_cast<Elem>(((x + y) % p) * scale);
                x /= p;
                y /= p;
                scale *= p;
            }
            ctx->add_[static_cast<std::size_t>(a) * Q + b] = static_cast<std::uint16_t>(sum);
            ctx->add_[static_cast<std::size_t>(b) * Q + a] = static_cast<std::uint16_t>(sum);
        }
    }
    for (Elem a = 0; a < Q; ++a) {
        Elem negated = 0;
        std::uint64_t scale = 1;
        Elem x = a;
        for (std::uint32_t i = 0; i < n; ++i) {
            Elem digit = x % p;
            negated += static_cast<Elem>(((p - digit) % p) * scale);
            x /= p;
            scale *= p;
        }
        ctx->neg_[a] = static_cast<std::uint16_t>(negated);
    }

    for (Elem a = 0; a < Q; ++a) {
        Poly pa = elem_to_poly(a, p, n);
        for (Elem b = 0; b <= a; ++b) {
            Poly pb = elem_to_poly(b, p, n);
            Elem prod = poly_to_elem(poly_mulmod(pa, pb, mod, p), p);
            ctx->mul_[static_cast<std::size_t>(a) * Q + b] = static_cast<std::uint16_t>(prod);
            ctx->mul_[static_cast<std::size_t>(b) * Q + a] = static_cast<std::uint16_t>(prod);
        }
    }

    ctx->inv_[0] = 0;
    for (Elem a = 1; a < Q; ++a)
        for (Elem b = 1; b < Q; ++b)
            if (ctx->mul_[static_cast<std::size_t>(a) * Q + b] == 1) {
                ctx->inv_[a] = static_cast<std::uint16_t>(b);
                break;
            }

    for (Elem a = 0; a < Q; ++a) {
        Elem acc = 0;
        Elem frob = a;
        for (std::uint32_t i = 0; i < n; ++i) {
            acc = ctx->add(acc, frob);
            frob = ctx->pow(frob, p);
        }
        // the trace lands in the prime subfield, whose codes are < p
        ctx->trace_[a] = static_cast<std::uint16_t>(acc);
    }

    std::vector<std::complex<double>> roots(p);
    for (std::uint32_t k = 0; k < p; ++k) {
        double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p);
        roots[k] = {std::cos(theta), std::sin(theta)};
    }
    for (Elem a = 0; a < Q; ++a) ctx->chi_[a] = roots[ctx->trace_[a]];

    return ctx;
}

} // namespace ffradon
