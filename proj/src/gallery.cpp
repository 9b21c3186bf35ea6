#include "qlab/gallery.hpp"

#include <cmath>
#include <complex>

namespace qlab {

namespace {

using Cplx = std::complex<double>;

Vec cplx_to_vec(Cplx w) { return {w.real(), w.imag()}; }

Cplx zpow(double x, double y, double a) { return std::pow(Cplx(x, y), a); }

}  // namespace

AnalyticSurface surface_V() {
    AnalyticSurface s;
    s.name = "V";
    s.q = 2;
    s.n = 2;
    s.sheets = [](double x, double y) {
        const Cplx w = zpow(x, y, 1.5);
        return std::vector<Vec>{cplx_to_vec(w), cplx_to_vec(-w)};
    };
    s.branch_locus = {{0.0, 0.0}};
    s.homogeneity = 1.5;
    s.rescale_exponents = {2, 2, 3, 3};
    s.defining_residual = [](double x, double y, const Vec& w) {
        const Cplx z(x, y), wz(w[0], w[1]);
        return std::abs(wz * wz - z * z * z);
    };
    return s;
}

AnalyticSurface surface_W() {
    AnalyticSurface s;
    s.name = "W";
    s.q = 2;
    s.n = 2;
    s.sheets = [](double x, double y) {
        const Cplx z2 = Cplx(x, y) * Cplx(x, y);
        const Cplx u = zpow(x, y, 2.5);
        return std::vector<Vec>{cplx_to_vec(z2 + u), cplx_to_vec(z2 - u)};
    };
    s.branch_locus = {{0.0, 0.0}};
    s.homogeneity = std::nullopt;  // centered variant carries 5/2
    s.rescale_exponents = {1, 1, 2, 2};
    s.defining_residual = [](double x, double y, const Vec& w) {
        const Cplx z(x, y), wz(w[0], w[1]);
        const Cplx lhs = (wz - z * z) * (wz - z * z);
        return std::abs(lhs - std::pow(z, 5));
    };
    return s;
}

AnalyticSurface surface_W_centered() {
    AnalyticSurface s;
    s.name = "W_centered";
    s.q = 2;
    s.n = 2;
    s.sheets = [](double x, double y) {
        const Cplx u = zpow(x, y, 2.5);
        return std::vector<Vec>{cplx_to_vec(u), cplx_to_vec(-u)};
    };
    s.branch_locus = {{0.0, 0.0}};
    s.homogeneity = 2.5;
    s.rescale_exponents = {2, 2, 5, 5};  // z -> lambda^2 z scales u by lambda^5
    s.defining_residual = [](double x, double y, const Vec& w) {
        const Cplx z(x, y), wz(w[0], w[1]);
        return std::abs(wz * wz - std::pow(z, 5));
    };
    return s;
}

AnalyticSurface surface_by_name(const std::string& name) {
    if (name == "V") return surface_V();
    if (name == "W") return surface_W();
    if (name == "W_centered") return surface_W_centered();
    throw contract_violation("unknown gallery surface: " + name);
}

SampledSurface sample_on_grid(const AnalyticSurface& s, const GridDomain& domain) {
    if (domain.m() != 2) throw contract_violation("sample_on_grid: m = 2 only");
    // evaluators are normalized to the closed unit disk
    for (std::size_t v : domain.domain_vertices()) {
        const Vec p = domain.position(v);
        if (p[0] * p[0] + p[1] * p[1] > 1.0 + 1e-9)
            throw contract_violation("sample_on_grid: domain must lie in |z| <= 1");
    }
    SampledSurface out;
    QGridFunction f(domain, s.q, s.n);
    for (std::size_t v : domain.domain_vertices()) {
        const Vec p = domain.position(v);
        const auto fiber = s.sheets(p[0], p[1]);
        if (static_cast<int>(fiber.size()) != s.q)
            throw contract_violation("sample_on_grid: evaluator returned wrong multiplicity");
        for (int i = 0; i < s.q; ++i)
            std::copy(fiber[i].begin(), fiber[i].end(), f.value(v).point(i).begin());
        for (const Vec& b : s.branch_locus) {
            if (dist2(p, b) <= 1e-24) out.branch_vertices.push_back(v);
        }
    }
    f.rematch_all();
    out.f = f;
    out.current = make_graph_current(std::move(f));
    out.current.sheet_evaluator = s.sheets;
    return out;
}

}  // namespace qlab
