#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qlab/common.hpp"

namespace qlab {

// 1-form  omega = sum_i b_i dx_i  on ambient R^d, with analytic partials
// (db_i/dx_j) so exterior derivatives carry no differencing error.
struct OneForm {
    int dim = 0;
    std::function<double(int i, std::span<const double> p)> coeff;
    std::function<double(int i, int j, std::span<const double> p)> dcoeff;  // d b_i / d x_j
};

// 2-form  omega = sum_{i<j} a_ij dx_i wedge dx_j;  coeff(i,j,p) is queried
// with i < j only.
struct TwoForm {
    int dim = 0;
    std::function<double(int i, int j, std::span<const double> p)> coeff;
};

inline TwoForm exterior_derivative(const OneForm& w) {
    TwoForm d;
    d.dim = w.dim;
    d.coeff = [dc = w.dcoeff](int i, int j, std::span<const double> p) {
        return dc(j, i, p) - dc(i, j, p);  // (d omega)_{ij} = di b_j - dj b_i
    };
    return d;
}

// b_component(p) = c * prod_k p_k^{e_k}, all other components zero
inline OneForm monomial_one_form(int dim, int component, std::vector<int> exponents, double c) {
    auto value = [](std::span<const double> p, const std::vector<int>& e) {
        double v = 1.0;
        for (std::size_t k = 0; k < e.size(); ++k)
            for (int t = 0; t < e[k]; ++t) v *= p[k];
        return v;
    };
    OneForm w;
    w.dim = dim;
    w.coeff = [component, exponents, c, value](int i, std::span<const double> p) {
        return i == component ? c * value(p, exponents) : 0.0;
    };
    w.dcoeff = [component, exponents, c, value](int i, int j, std::span<const double> p) {
        if (i != component || exponents[j] == 0) return 0.0;
        auto e = exponents;
        e[j] -= 1;
        return c * exponents[j] * value(p, e);
    };
    return w;
}

inline OneForm add(const OneForm& a, const OneForm& b) {
    OneForm w;
    w.dim = a.dim;
    w.coeff = [ca = a.coeff, cb = b.coeff](int i, std::span<const double> p) {
        return ca(i, p) + cb(i, p);
    };
    w.dcoeff = [da = a.dcoeff, db = b.dcoeff](int i, int j, std::span<const double> p) {
        return da(i, j, p) + db(i, j, p);
    };
    return w;
}

// constant 2-form dx_i wedge dx_j
inline TwoForm constant_two_form(int dim, int i0, int j0, double c = 1.0) {
    TwoForm w;
    w.dim = dim;
    w.coeff = [i0, j0, c](int i, int j, std::span<const double>) {
        return (i == i0 && j == j0) ? c : 0.0;
    };
    return w;
}

// ---- simple 2-vectors in pair coordinates ------------------------------

// flat index of the ordered pair (i,j), i < j, in dimension d
inline int pair_index(int d, int i, int j) { return i * d + j; }

// wedge u ^ v stored sparsely as a d*d flat array over (i<j) slots
inline Vec wedge2(std::span<const double> u, std::span<const double> v) {
    const int d = static_cast<int>(u.size());
    Vec w(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) w[pair_index(d, i, j)] = u[i] * v[j] - u[j] * v[i];
    return w;
}

inline double pair_dot(const Vec& a, const Vec& b) { return dot(a, b); }

// graph plane of the linear map x -> x A over pi_0; tilt is m x n row-major
// (row = domain axis, column = target axis)
struct Plane {
    int m = 2;
    int n = 1;
    Vec tilt;  // m*n entries

    Plane() = default;
    Plane(int m_, int n_) : m(m_), n(n_), tilt(static_cast<std::size_t>(m_) * n_, 0.0) {}
    Plane(int m_, int n_, Vec t) : m(m_), n(n_), tilt(std::move(t)) {
        if (tilt.size() != static_cast<std::size_t>(m_) * n_)
            throw contract_violation("Plane: tilt size != m*n");
    }

    int ambient_dim() const { return m + n; }

    // v_i = e_i + sum_j tilt[i][j] e_{m+j}
    std::vector<Vec> basis() const {
        std::vector<Vec> b(m, Vec(static_cast<std::size_t>(m + n), 0.0));
        for (int i = 0; i < m; ++i) {
            b[i][i] = 1.0;
            for (int j = 0; j < n; ++j) b[i][m + j] = tilt[static_cast<std::size_t>(i) * n + j];
        }
        return b;
    }

    // normalized orienting 2-vector (m = 2 only), pair coordinates
    Vec unit_mvector() const {
        if (m != 2) throw contract_violation("Plane::unit_mvector: m = 2 only");
        const auto b = basis();
        Vec w = wedge2(b[0], b[1]);
        const double nrm = norm(w);
        for (double& x : w) x /= nrm;
        return w;
    }
};

// unit 2-vector of the oriented triangle (A,B,C) and its area
struct TriangleGeometry {
    Vec unit_mvector;  // pair coordinates
    double area = 0.0;
};

inline TriangleGeometry triangle_geometry(std::span<const double> a, std::span<const double> b,
                                          std::span<const double> c) {
    const int d = static_cast<int>(a.size());
    Vec u(d), v(d);
    for (int i = 0; i < d; ++i) {
        u[i] = b[i] - a[i];
        v[i] = c[i] - a[i];
    }
    TriangleGeometry g;
    g.unit_mvector = wedge2(u, v);
    const double nrm = norm(g.unit_mvector);
    g.area = 0.5 * nrm;
    if (nrm > 0.0)
        for (double& x : g.unit_mvector) x /= nrm;
    return g;
}

}  // namespace qlab
