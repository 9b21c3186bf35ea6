#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "qlab/common.hpp"

namespace qlab {

// An unordered Q-tuple of points in R^n.  The internal order of `points` is
// an implementation detail; semantic identity is the multiset.
struct QPoint {
    int q = 0;
    int dim = 0;
    Vec xs;  // q * dim doubles, point i at [i*dim, (i+1)*dim)

    QPoint() = default;
    QPoint(int q_, int dim_) : q(q_), dim(dim_), xs(static_cast<std::size_t>(q_) * dim_, 0.0) {
        if (q_ <= 0 || dim_ <= 0) throw contract_violation("QPoint: q and dim must be positive");
    }
    QPoint(int q_, int dim_, Vec values) : q(q_), dim(dim_), xs(std::move(values)) {
        if (q_ <= 0 || dim_ <= 0) throw contract_violation("QPoint: q and dim must be positive");
        if (xs.size() != static_cast<std::size_t>(q_) * dim_)
            throw contract_violation("QPoint: value count != q*dim");
    }

    std::span<const double> point(int i) const {
        return {xs.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<double> point(int i) {
        return {xs.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
};

// Permutation pairing the points of one QPoint with another, together with
// the squared-distance cost it realizes.
struct Matching {
    std::vector<int> perm;  // point i of `a` pairs with point perm[i] of `b`
    double cost = 0.0;

    bool is_identity() const {
        for (std::size_t i = 0; i < perm.size(); ++i)
            if (perm[i] != static_cast<int>(i)) return false;
        return true;
    }
};

inline std::vector<int> inverse_perm(const std::vector<int>& p) {
    std::vector<int> inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
    return inv;
}

inline std::vector<int> compose_perm(const std::vector<int>& outer, const std::vector<int>& inner) {
    // (outer ∘ inner)(i) = outer[inner[i]]
    std::vector<int> r(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i) r[i] = outer[inner[i]];
    return r;
}

// Sorts the Q points lexicographically by coordinates.  This is the
// canonical representative used for equality tests and serialization.
QPoint canonical(const QPoint& a);

bool multiset_equal(const QPoint& a, const QPoint& b, double tol = 0.0);

// Exponent-two matching distance on A_Q(R^n):
// min over permutations of sqrt(sum_i |P_i - S_{sigma(i)}|^2).
double g_dist(const QPoint& a, const QPoint& b);

// The minimizing permutation, lexicographically smallest among ties, and its
// squared cost.  Exhaustive for q <= 6, Kuhn–Munkres beyond.
Matching optimal_matching(const QPoint& a, const QPoint& b);

// Arithmetic mean of the points.
Vec eta(const QPoint& a);

// g_dist(a, Q copies of eta(a)) = sqrt(sum_i |P_i - eta(a)|^2).
double g_to_mean(const QPoint& a);

// O(n^3) assignment on a square cost matrix; returns row -> column.
// Exposed for reuse; deterministic.
double solve_assignment(const std::vector<Vec>& cost, std::vector<int>& row_to_col);

nlohmann::ordered_json qpoint_to_json(const QPoint& a);
QPoint qpoint_from_json(const nlohmann::json& j);

}  // namespace qlab
