#include "qlab/aq.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace qlab {

namespace {

bool lex_less(std::span<const double> a, std::span<const double> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

void check_compatible(const QPoint& a, const QPoint& b) {
    if (a.q != b.q) throw contract_violation("QPoint multiplicity mismatch");
    if (a.dim != b.dim) throw contract_violation("QPoint dimension mismatch");
}

std::vector<Vec> cost_matrix(const QPoint& a, const QPoint& b) {
    std::vector<Vec> c(a.q, Vec(a.q, 0.0));
    for (int i = 0; i < a.q; ++i)
        for (int j = 0; j < a.q; ++j) c[i][j] = dist2(a.point(i), b.point(j));
    return c;
}

double perm_cost(const std::vector<Vec>& c, const std::vector<int>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c[i][p[i]];
    return s;
}

Matching exhaustive_matching(const std::vector<Vec>& c, int q) {
    std::vector<int> p(q);
    std::iota(p.begin(), p.end(), 0);
    std::vector<int> best = p;
    double best_cost = perm_cost(c, p);
    while (std::next_permutation(p.begin(), p.end())) {
        const double cost = perm_cost(c, p);
        // strict < keeps the lexicographically smallest permutation on ties
        if (cost < best_cost) {
            best_cost = cost;
            best = p;
        }
    }
    return {std::move(best), best_cost};
}

}  // namespace

double solve_assignment(const std::vector<Vec>& cost, std::vector<int>& row_to_col) {
    // Kuhn–Munkres with dual potentials, O(n^3).
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[i][row_to_col[i]];
    return total;
}

namespace {

// Refine a Hungarian solution to the lexicographically smallest optimal
// permutation.  Ties are detected with a relative tolerance: float sums of
// identical cost sets can differ in the last ulps depending on order.
Matching lex_refined_matching(const std::vector<Vec>& c, int q) {
    std::vector<int> sol;
    const double opt = solve_assignment(c, sol);
    const double tol = 1e-12 * std::max(1.0, std::abs(opt));

    std::vector<int> perm(q, -1);
    std::vector<char> used(q, 0);
    double fixed = 0.0;
    std::vector<int> rows(q), cols(q);
    for (int i = 0; i < q; ++i) {
        bool placed = false;
        for (int j = 0; j < q && !placed; ++j) {
            if (used[j]) continue;
            // cost of the best completion with i -> j fixed
            int nr = 0;
            for (int r = i + 1; r < q; ++r) rows[nr++] = r;
            int nc = 0;
            for (int cc = 0; cc < q; ++cc)
                if (!used[cc] && cc != j) cols[nc++] = cc;
            double sub = 0.0;
            if (nr > 0) {
                std::vector<Vec> subc(nr, Vec(nr, 0.0));
                for (int r = 0; r < nr; ++r)
                    for (int s = 0; s < nr; ++s) subc[r][s] = c[rows[r]][cols[s]];
                std::vector<int> subsol;
                sub = solve_assignment(subc, subsol);
            }
            if (fixed + c[i][j] + sub <= opt + tol) {
                perm[i] = j;
                used[j] = 1;
                fixed += c[i][j];
                placed = true;
            }
        }
        if (!placed) {  // numerical fallback: keep the Hungarian column
            perm[i] = sol[i];
            used[sol[i]] = 1;
            fixed += c[i][sol[i]];
        }
    }
    const double cost = perm_cost(c, perm);
    return {std::move(perm), cost};
}

}  // namespace

QPoint canonical(const QPoint& a) {
    std::vector<int> order(a.q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return lex_less(a.point(i), a.point(j)); });
    QPoint out(a.q, a.dim);
    for (int i = 0; i < a.q; ++i) {
        auto src = a.point(order[i]);
        std::copy(src.begin(), src.end(), out.point(i).begin());
    }
    return out;
}

bool multiset_equal(const QPoint& a, const QPoint& b, double tol) {
    if (a.q != b.q || a.dim != b.dim) return false;
    const QPoint ca = canonical(a), cb = canonical(b);
    if (tol == 0.0) return ca.xs == cb.xs;
    for (std::size_t i = 0; i < ca.xs.size(); ++i)
        if (std::abs(ca.xs[i] - cb.xs[i]) > tol) return false;
    return true;
}

Matching optimal_matching(const QPoint& a, const QPoint& b) {
    check_compatible(a, b);
    const auto c = cost_matrix(a, b);
    if (a.q <= 6) return exhaustive_matching(c, a.q);
    return lex_refined_matching(c, a.q);
}

double g_dist(const QPoint& a, const QPoint& b) {
    check_compatible(a, b);
    // fixed evaluation order makes symmetry bitwise exact
    const bool swap = std::lexicographical_compare(b.xs.begin(), b.xs.end(), a.xs.begin(), a.xs.end());
    const QPoint& x = swap ? b : a;
    const QPoint& y = swap ? a : b;
    if (x.q <= 6) {
        const auto c = cost_matrix(x, y);
        return std::sqrt(exhaustive_matching(c, x.q).cost);
    }
    std::vector<int> sol;
    return std::sqrt(solve_assignment(cost_matrix(x, y), sol));
}

Vec eta(const QPoint& a) {
    Vec m(a.dim, 0.0);
    for (int i = 0; i < a.q; ++i) {
        auto p = a.point(i);
        for (int d = 0; d < a.dim; ++d) m[d] += p[d];
    }
    for (double& x : m) x /= a.q;
    return m;
}

double g_to_mean(const QPoint& a) {
    const Vec m = eta(a);
    double s = 0.0;
    for (int i = 0; i < a.q; ++i) s += dist2(a.point(i), m);
    return std::sqrt(s);
}

nlohmann::ordered_json qpoint_to_json(const QPoint& a) {
    const QPoint c = canonical(a);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int i = 0; i < c.q; ++i) {
        nlohmann::ordered_json pt = nlohmann::ordered_json::array();
        for (double x : c.point(i)) pt.push_back(x);
        arr.push_back(std::move(pt));
    }
    return arr;
}

QPoint qpoint_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw contract_violation("QPoint json: expected array of points");
    const int q = static_cast<int>(j.size());
    const int dim = static_cast<int>(j[0].size());
    QPoint out(q, dim);
    for (int i = 0; i < q; ++i) {
        if (static_cast<int>(j[i].size()) != dim)
            throw contract_violation("QPoint json: ragged point dimensions");
        for (int d = 0; d < dim; ++d) out.point(i)[d] = j[i][d].get<double>();
    }
    return out;
}

}  // namespace qlab
