#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlab/frequency.hpp"
#include "qlab/gallery.hpp"

using namespace qlab;

namespace {

QPoint to_qpoint(const std::vector<Vec>& fiber) {
    QPoint p(static_cast<int>(fiber.size()), static_cast<int>(fiber[0].size()));
    for (std::size_t i = 0; i < fiber.size(); ++i)
        std::copy(fiber[i].begin(), fiber[i].end(), p.point(i).begin());
    return p;
}

}  // namespace

TEST_CASE("V: sheet values, branch merge, rescaling invariance") {
    const auto V = surface_V();
    const auto at1 = to_qpoint(V.sheets(1.0, 0.0));
    CHECK(multiset_equal(at1, QPoint(2, 2, {1, 0, -1, 0}), 1e-14));
    const auto at0 = to_qpoint(V.sheets(0.0, 0.0));
    CHECK(norm2(at0.xs) == doctest::Approx(0.0));

    // (Phi_lambda)# T_V = T_V: sheets at lambda^2 z equal lambda^3 sheets(z)
    Rng rng(42);
    const double lambda = 2.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double x = rng.uniform(-0.24, 0.24), y = rng.uniform(-0.24, 0.24);
        auto lhs = to_qpoint(V.sheets(lambda * lambda * x, lambda * lambda * y));
        auto rhs = to_qpoint(V.sheets(x, y));
        for (double& t : rhs.xs) t *= lambda * lambda * lambda;
        CHECK(multiset_equal(lhs, rhs, 1e-12));
    }
}

TEST_CASE("V and W satisfy their defining polynomials at samples") {
    Rng rng(7);
    for (const auto& s : {surface_V(), surface_W(), surface_W_centered()}) {
        for (int trial = 0; trial < 100; ++trial) {
            const double x = rng.uniform(-0.7, 0.7), y = rng.uniform(-0.7, 0.7);
            for (const Vec& w : s.sheets(x, y)) CHECK(s.defining_residual(x, y, w) <= 1e-12);
        }
    }
}

TEST_CASE("W: sheet values, center surface, inhomogeneous blowup") {
    const auto W = surface_W();
    const auto at1 = to_qpoint(W.sheets(1.0, 0.0));
    CHECK(multiset_equal(at1, QPoint(2, 2, {2, 0, 0, 0}), 1e-14));

    // eta of the sheets is exactly z^2
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double x = rng.uniform(-0.7, 0.7), y = rng.uniform(-0.7, 0.7);
        const Vec mean = eta(to_qpoint(W.sheets(x, y)));
        CHECK(mean[0] == doctest::Approx(x * x - y * y).epsilon(1e-13));
        CHECK(mean[1] == doctest::Approx(2 * x * y).epsilon(1e-13));
    }

    // rescaled sheets converge to the double copy of w = z^2 at rate
    // lambda^{-1/2}: sup over |z| <= 1 of the deviation equals lambda^{-1/2}
    auto sup_dev = [&](double lambda) {
        double worst = 0.0;
        for (int i = -8; i <= 8; ++i)
            for (int j = -8; j <= 8; ++j) {
                const double x = i / 8.0 * 0.7, y = j / 8.0 * 0.7;
                const auto fiber = W.sheets(x / lambda, y / lambda);
                for (const Vec& w : fiber) {
                    const double dx = lambda * lambda * w[0] - (x * x - y * y);
                    const double dy = lambda * lambda * w[1] - 2 * x * y;
                    worst = std::max(worst, std::hypot(dx, dy));
                }
            }
        return worst;
    };
    const double d4 = sup_dev(4.0), d16 = sup_dev(16.0);
    CHECK(d16 / d4 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("centered sheets average to zero pointwise") {
    Rng rng(11);
    for (const auto& s : {surface_V(), surface_W_centered()}) {
        for (int trial = 0; trial < 50; ++trial) {
            const double x = rng.uniform(-0.7, 0.7), y = rng.uniform(-0.7, 0.7);
            const Vec mean = eta(to_qpoint(s.sheets(x, y)));
            CHECK(norm2(mean) <= 1e-28);
        }
    }
}

TEST_CASE("sample_on_grid: constant surface has mass Q |Omega|") {
    AnalyticSurface flat;
    flat.name = "flat";
    flat.q = 3;
    flat.n = 1;
    flat.sheets = [](double, double) { return std::vector<Vec>{{0.0}, {0.0}, {0.0}}; };
    const auto dom = GridDomain::rectangle({-0.5, -0.5}, {0.5, 0.5}, 1.0 / 8);
    const auto s = sample_on_grid(flat, dom);
    CHECK(graph_mass_exact(s.current) == doctest::Approx(3.0 * dom.domain_volume()));
    CHECK(dirichlet_energy(s.f) == doctest::Approx(0.0));
}

TEST_CASE("sample_on_grid: V branch set sits at the origin plaquette") {
    const auto dom = GridDomain::disk({0, 0}, 1.0, 1.0 / 32);
    const auto s = sample_on_grid(surface_V(), dom);
    CHECK(s.branch_vertices.size() == 1);
    const auto sel = select_sheets(s.f);
    CHECK(!sel.selection_exists);
    for (std::size_t cell : sel.branch_cells) {
        const int cw = dom.extents()[0] - 1;
        const std::size_t raw = cell;
        const Vec cc = dom.cell_center(raw);
        (void)cw;
        CHECK(std::hypot(cc[0], cc[1]) <= 1.5 * dom.h());
    }
}

TEST_CASE("centered W: smoothed frequency flat at 5/2") {
    const auto dom = GridDomain::disk({0, 0}, 1.0, 1.0 / 128);
    const auto s = sample_on_grid(surface_W_centered(), dom);
    const auto prof = frequency_profile(s.f, {0, 0}, 0.2, 0.8, 8, FrequencyVariant::Smoothed);
    for (const auto& e : prof.entries) {
        REQUIRE(e.I.has_value());
        CHECK(*e.I == doctest::Approx(2.5).epsilon(0.02));
    }
}

TEST_CASE("sample_on_grid rejects domains outside the unit disk") {
    const auto dom = GridDomain::rectangle({0, 0}, {2, 1}, 1.0 / 4);
    CHECK_THROWS_AS(sample_on_grid(surface_V(), dom), contract_violation);
}
