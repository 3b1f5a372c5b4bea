#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ffradon/errors.hpp"
#include "ffradon/field.hpp"

namespace ffradon {

/// A point of F_q^d. Ranks are mixed-radix codes: rank = sum coords[i] * q^i.
struct Point {
    std::vector<Elem> coords;

    friend bool operator==(const Point&, const Point&) = default;
};

inline std::uint64_t point_rank(const FieldCtx& F, const Point& x) {
    std::uint64_t r = 0;
    std::uint64_t scale = 1;
    for (Elem c : x.coords) {
        r += c * scale;
        scale *= F.q();
    }
    return r;
}

inline Point point_unrank(const FieldCtx& F, int d, std::uint64_t rank) {
    Point x;
    x.coords.resize(d);
    for (int i = 0; i < d; ++i) {
        x.coords[i] = static_cast<Elem>(rank % F.q());
        rank /= F.q();
    }
    return x;
}

inline std::uint64_t grid_size(const FieldCtx& F, int d) {
    std::uint64_t n = 1;
    for (int i = 0; i < d; ++i) {
        n *= F.q();
        if (n > F.caps().max_points)
            raise(Errc::SizeCapExceeded, "q^d exceeds the point cap");
    }
    return n;
}

inline std::vector<Point> enumerate_points(const FieldCtx& F, int d) {
    std::uint64_t n = grid_size(F, d);
    std::vector<Point> out;
    out.reserve(n);
    for (std::uint64_t r = 0; r < n; ++r) out.push_back(point_unrank(F, d, r));
    return out;
}

namespace detail {

// Gauss-Jordan to reduced row echelon form; drops zero rows, returns pivots.
inline std::vector<int> rref_in_place(const FieldCtx& F, std::vector<std::vector<Elem>>& rows) {
    std::vector<int> pivots;
    if (rows.empty()) return pivots;
    const int d = static_cast<int>(rows[0].size());
    std::size_t rank = 0;
    for (int col = 0; col < d && rank < rows.size(); ++col) {
        std::size_t sel = rank;
        while (sel < rows.size() && rows[sel][col] == 0) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[rank], rows[sel]);
        Elem piv_inv = F.inv(rows[rank][col]);
        for (int j = 0; j < d; ++j) rows[rank][j] = F.mul(rows[rank][j], piv_inv);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            Elem factor = rows[r][col];
            for (int j = 0; j < d; ++j)
                rows[r][j] = F.sub(rows[r][j], F.mul(factor, rows[rank][j]));
        }
        pivots.push_back(col);
        ++rank;
    }
    rows.resize(rank);
    return pivots;
}

} // namespace detail

/// A canonical affine k-flat: directions in reduced row echelon form and the
/// unique coset representative with zeros in all pivot coordinates. Two flats
/// are equal as point sets iff these fields compare equal.
struct Flat {
    int dim = 0;
    Point basepoint;
    std::vector<std::vector<Elem>> directions; // dim rows of length d, RREF
    std::vector<int> pivots;

    int ambient_dim() const { return static_cast<int>(basepoint.coords.size()); }

    friend bool operator==(const Flat& a, const Flat& b) {
        return a.dim == b.dim && a.basepoint == b.basepoint && a.directions == b.directions;
    }

    // total-order key, handy for set-based dedup in tests and reports
    std::vector<std::uint32_t> key() const {
        std::vector<std::uint32_t> k;
        k.push_back(static_cast<std::uint32_t>(dim));
        for (Elem c : basepoint.coords) k.push_back(c);
        for (const auto& row : directions)
            for (Elem c : row) k.push_back(c);
        return k;
    }
};

/// Canonicalizes (basepoint + span of spanning_vectors) into a Flat.
inline Flat make_flat(const FieldCtx& F, Point basepoint,
                      std::vector<std::vector<Elem>> spanning_vectors) {
    const int d = static_cast<int>(basepoint.coords.size());
    for (const auto& v : spanning_vectors)
        if (static_cast<int>(v.size()) != d)
            raise(Errc::DimensionMismatch, "direction length != ambient dimension");
    Flat flat;
    flat.pivots = detail::rref_in_place(F, spanning_vectors);
    flat.directions = std::move(spanning_vectors);
    flat.dim = static_cast<int>(flat.directions.size());
    for (std::size_t r = 0; r < flat.directions.size(); ++r) {
        Elem c = basepoint.coords[flat.pivots[r]];
        if (c == 0) continue;
        for (int j = 0; j < d; ++j)
            basepoint.coords[j] = F.sub(basepoint.coords[j], F.mul(c, flat.directions[r][j]));
    }
    flat.basepoint = std::move(basepoint);
    return flat;
}

/// Smallest affine subspace containing the given points.
inline Flat affine_span(const FieldCtx& F, const std::vector<Point>& pts) {
    if (pts.empty()) raise(Errc::EmptyInput, "affine span of an empty set");
    const int d = static_cast<int>(pts[0].coords.size());
    std::vector<std::vector<Elem>> diffs;
    diffs.reserve(pts.size() - 1);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (static_cast<int>(pts[i].coords.size()) != d)
            raise(Errc::DimensionMismatch, "points of mixed dimension");
        std::vector<Elem> v(d);
        for (int j = 0; j < d; ++j) v[j] = F.sub(pts[i].coords[j], pts[0].coords[j]);
        diffs.push_back(std::move(v));
    }
    return make_flat(F, pts[0], std::move(diffs));
}

inline bool incident(const FieldCtx& F, const Flat& flat, const Point& x) {
    const int d = flat.ambient_dim();
    if (static_cast<int>(x.coords.size()) != d)
        raise(Errc::DimensionMismatch, "point dimension != flat dimension");
    std::vector<Elem> v(d);
    for (int j = 0; j < d; ++j) v[j] = F.sub(x.coords[j], flat.basepoint.coords[j]);
    for (std::size_t r = 0; r < flat.directions.size(); ++r) {
        Elem c = v[flat.pivots[r]];
        if (c == 0) continue;
        for (int j = 0; j < d; ++j) v[j] = F.sub(v[j], F.mul(c, flat.directions[r][j]));
    }
    for (int j = 0; j < d; ++j)
        if (v[j] != 0) return false;
    return true;
}

/// All q^dim points of a flat, as ranks, in coefficient odometer order.
inline std::vector<std::uint32_t> flat_point_ranks(const FieldCtx& F, const Flat& flat) {
    const int d = flat.ambient_dim();
    const int k = flat.dim;
    std::uint64_t count = 1;
    for (int i = 0; i < k; ++i) count *= F.q();
    std::vector<std::uint32_t> out;
    out.reserve(count);
    std::vector<Elem> coeff(k, 0);
    Point x;
    x.coords.resize(d);
    for (std::uint64_t it = 0;; ++it) {
        for (int j = 0; j < d; ++j) x.coords[j] = flat.basepoint.coords[j];
        for (int r = 0; r < k; ++r) {
            if (coeff[r] == 0) continue;
            for (int j = 0; j < d; ++j)
                x.coords[j] = F.add(x.coords[j], F.mul(coeff[r], flat.directions[r][j]));
        }
        out.push_back(static_cast<std::uint32_t>(point_rank(F, x)));
        int pos = 0;
        while (pos < k) {
            if (++coeff[pos] < F.q()) break;
            coeff[pos++] = 0;
        }
        if (pos == k) break;
    }
    return out;
}

/// Exact number of lines containing a flat of dimension s: a pencil through a
/// point for s = 0, the line itself for s = 1, and 0 for s >= 2 (no line
/// contains a higher-dimensional flat).
inline std::uint64_t count_lines_through(const FieldCtx& F, int d, const Flat& flat) {
    if (flat.dim == 0) {
        std::uint64_t qd = 1;
        for (int i = 0; i < d; ++i) qd *= F.q();
        return (qd - 1) / (F.q() - 1);
    }
    if (flat.dim == 1) return 1;
    return 0;
}

namespace detail {

// counts only need to be exact below the size caps, so arithmetic on the way
// to a cap rejection saturates instead of wrapping
constexpr std::uint64_t kCountSaturation = std::uint64_t{1} << 62;

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kCountSaturation / a) return kCountSaturation;
    return a * b;
}

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kCountSaturation ? kCountSaturation : s;
}

} // namespace detail

/// q-binomial coefficient: the number of k-dimensional linear subspaces of
/// F_q^d. Exact for every value below 2^62, saturated above.
inline std::uint64_t gaussian_binomial(int d, int k, std::uint64_t q) {
    if (k < 0 || k > d) return 0;
    // q-Pascal recurrence, exact in integers
    std::vector<std::vector<std::uint64_t>> gb(d + 1, std::vector<std::uint64_t>(k + 1, 0));
    for (int nn = 0; nn <= d; ++nn) {
        gb[nn][0] = 1;
        for (int kk = 1; kk <= std::min(nn, k); ++kk) {
            std::uint64_t qk = 1;
            for (int i = 0; i < kk; ++i) qk = detail::sat_mul(qk, q);
            std::uint64_t grow = kk <= nn - 1 ? detail::sat_mul(gb[nn - 1][kk], qk) : 0;
            gb[nn][kk] = detail::sat_add(grow, gb[nn - 1][kk - 1]);
        }
    }
    return gb[d][k];
}

inline std::uint64_t kplane_family_size(const FieldCtx& F, int d, int k) {
    std::uint64_t count = gaussian_binomial(d, k, F.q());
    for (int i = 0; i < d - k; ++i) count = detail::sat_mul(count, F.q());
    return count;
}

/// Enumerates all affine k-flats of F_q^d, each exactly once in canonical
/// form. Order: pivot-column sets lexicographically, then free direction
/// entries, then coset representatives, both as little-endian base-q odometers.
inline std::vector<Flat> enumerate_kplanes(const FieldCtx& F, int d, int k) {
    if (k < 1 || k > d - 1) raise(Errc::BadConfig, "k must satisfy 1 <= k <= d-1");
    grid_size(F, d);
    if (kplane_family_size(F, d, k) > F.caps().max_points)
        raise(Errc::SizeCapExceeded, "|Pi_k| exceeds the family cap");

    std::vector<Flat> out;
    out.reserve(kplane_family_size(F, d, k));

    std::vector<int> pivots(k);
    for (int i = 0; i < k; ++i) pivots[i] = i;

    auto emit_for_pivots = [&]() {
        std::vector<bool> is_pivot(d, false);
        for (int c : pivots) is_pivot[c] = true;

        // free direction cells: row r, columns past its pivot that are not pivots
        std::vector<std::pair<int, int>> free_cells;
        for (int r = 0; r < k; ++r)
            for (int c = pivots[r] + 1; c < d; ++c)
                if (!is_pivot[c]) free_cells.emplace_back(r, c);

        std::vector<int> nonpivot_cols;
        for (int c = 0; c < d; ++c)
            if (!is_pivot[c]) nonpivot_cols.push_back(c);

        std::vector<Elem> cells(free_cells.size(), 0);
        for (;;) {
            std::vector<std::vector<Elem>> dirs(k, std::vector<Elem>(d, 0));
            for (int r = 0; r < k; ++r) dirs[r][pivots[r]] = 1;
            for (std::size_t i = 0; i < free_cells.size(); ++i)
                dirs[free_cells[i].first][free_cells[i].second] = cells[i];

            std::uint64_t cosets = 1;
            for (int i = 0; i < d - k; ++i) cosets *= F.q();
            for (std::uint64_t m = 0; m < cosets; ++m) {
                Flat flat;
                flat.dim = k;
                flat.directions = dirs;
                flat.pivots = pivots;
                flat.basepoint.coords.assign(d, 0);
                std::uint64_t digits = m;
                for (int j = 0; j < d - k; ++j) {
                    flat.basepoint.coords[nonpivot_cols[j]] =
                        static_cast<Elem>(digits % F.q());
                    digits /= F.q();
                }
                out.push_back(std::move(flat));
            }

            std::size_t pos = 0;
            while (pos < cells.size()) {
                if (++cells[pos] < F.q()) break;
                cells[pos++] = 0;
            }
            if (pos == cells.size()) break;
        }
    };

    // lexicographic combinations of pivot columns
    for (;;) {
        emit_for_pivots();
        int i = k - 1;
        while (i >= 0 && pivots[i] == d - k + i) --i;
        if (i < 0) break;
        ++pivots[i];
        for (int j = i + 1; j < k; ++j) pivots[j] = pivots[j - 1] + 1;
    }
    return out;
}

enum class HyperplaneKind { H, Theta };

/// A hyperplane together with its dual vector: w = {x : w'.x = 1} for kind H
/// (origin not on w, w' unique) and w = {x : w'.x = 0} for kind Theta, where
/// w' is the representative of the dual line with leading nonzero
/// coordinate 1.
struct HyperplaneDual {
    HyperplaneKind kind = HyperplaneKind::Theta;
    Point dual;
    Flat flat;
};

/// Duals for a list of (d-1)-flats, index-aligned with the input.
inline std::vector<HyperplaneDual> hyperplane_duals(const FieldCtx& F,
                                                    const std::vector<Flat>& flats) {
    std::vector<HyperplaneDual> out;
    out.reserve(flats.size());
    for (const Flat& flat : flats) {
        const int d = flat.ambient_dim();
        if (flat.dim != d - 1)
            raise(Errc::DimensionMismatch, "hyperplane dual of a non-hyperplane");
        std::vector<bool> is_pivot(d, false);
        for (int c : flat.pivots) is_pivot[c] = true;
        int j0 = 0;
        while (is_pivot[j0]) ++j0;

        // the one-dimensional null space of the direction rows
        std::vector<Elem> a(d, 0);
        a[j0] = 1;
        for (int r = 0; r < d - 1; ++r) a[flat.pivots[r]] = F.neg(flat.directions[r][j0]);

        Elem c = 0;
        for (int j = 0; j < d; ++j) c = F.add(c, F.mul(a[j], flat.basepoint.coords[j]));

        HyperplaneDual hd;
        hd.flat = flat;
        if (c != 0) {
            hd.kind = HyperplaneKind::H;
            Elem s = F.inv(c);
            for (auto& v : a) v = F.mul(s, v);
        } else {
            hd.kind = HyperplaneKind::Theta;
            int lead = 0;
            while (a[lead] == 0) ++lead;
            Elem s = F.inv(a[lead]);
            for (auto& v : a) v = F.mul(s, v);
        }
        hd.dual.coords = std::move(a);
        out.push_back(std::move(hd));
    }
    return out;
}

/// Partition of Pi_{d-1} into H (origin off the plane) and Theta (through the
/// origin), index-aligned with enumerate_kplanes(F, d, d-1).
inline std::vector<HyperplaneDual> hyperplane_split(const FieldCtx& F, int d) {
    if (d < 2) raise(Errc::BadConfig, "hyperplane split needs d >= 2");
    return hyperplane_duals(F, enumerate_kplanes(F, d, d - 1));
}

} // namespace ffradon
