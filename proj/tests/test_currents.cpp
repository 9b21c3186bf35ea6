#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qlab/excess.hpp"
#include "qlab/gallery.hpp"
#include "qlab/graph_approx.hpp"

using namespace qlab;

namespace {

QGraphCurrent flat_current(double h, int q, int n, double value_offset = 0.0) {
    const auto dom = GridDomain::rectangle({0, 0}, {1, 1}, h);
    QGridFunction f(dom, q, n);
    for (std::size_t v : dom.domain_vertices())
        for (int i = 0; i < q; ++i) f.value(v).point(i)[0] = value_offset;
    f.rematch_all();
    return make_graph_current(std::move(f));
}

// single-valued graph of x -> a . x over a rectangle or disk
QGraphCurrent linear_graph(const GridDomain& dom, double ax, double ay) {
    QGridFunction f(dom, 1, 1);
    for (std::size_t v : dom.domain_vertices()) {
        const Vec p = dom.position(v);
        f.value(v).point(0)[0] = ax * p[0] + ay * p[1];
    }
    f.rematch_all();
    return make_graph_current(std::move(f));
}

QGraphCurrent pm_sheets(const GridDomain& dom, double scale, double power, int n_out) {
    QGridFunction f(dom, 2, n_out);
    for (std::size_t v : dom.domain_vertices()) {
        const Vec p = dom.position(v);
        const auto w = scale * std::pow(std::complex<double>(p[0], p[1]), power);
        f.value(v).point(0)[0] = w.real();
        f.value(v).point(1)[0] = -w.real();
        if (n_out > 1) {
            f.value(v).point(0)[1] = w.imag();
            f.value(v).point(1)[1] = -w.imag();
        }
    }
    f.rematch_all();
    return make_graph_current(std::move(f));
}

double slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    // least squares on log-log
    const int k = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(std::abs(ys[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace

TEST_CASE("pairing with forms: flat square") {
    const auto T = flat_current(1.0 / 8, 1, 1);
    CHECK(pair_with_form(T, constant_two_form(3, 0, 1)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(pair_with_form(T, constant_two_form(3, 0, 2)) == doctest::Approx(0.0));

    const auto Tq = flat_current(1.0 / 8, 3, 2);
    CHECK(pair_with_form(Tq, constant_two_form(4, 0, 1)) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("pairing: projection multiplicity for a tilted graph") {
    const auto dom = GridDomain::rectangle({0, 0}, {1, 1}, 1.0 / 16);
    const auto T = linear_graph(dom, 0.3, 0.0);
    CHECK(pair_with_form(T, constant_two_form(3, 0, 1)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("boundary defect: Stokes on the square") {
    const auto T = flat_current(1.0 / 16, 1, 1);
    // omega = x0 dx1: d omega = dx0 ^ dx1, both sides equal the area
    const auto omega = monomial_one_form(3, 1, {1, 0, 0}, 1.0);
    CHECK(pair_with_form(T, exterior_derivative(omega)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(boundary_pairing(T, omega) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(boundary_defect(T, omega)) <= 1e-10);

    // closed form: omega = dx0 (constant): defect must vanish to roundoff
    const auto closed = monomial_one_form(3, 0, {0, 0, 0}, 1.0);
    CHECK(std::abs(pair_with_form(T, exterior_derivative(closed))) <= 1e-14);
    CHECK(std::abs(boundary_defect(T, closed)) <= 1e-12);
}

TEST_CASE("boundary defect: Richardson order >= 2") {
    std::vector<double> hs{1.0 / 16, 1.0 / 32, 1.0 / 64};

    // multiplicity-1 quadratic graph over the annulus
    const auto omega3 = monomial_one_form(3, 1, {2, 0, 1}, 0.7);
    std::vector<double> defects1;
    for (double h : hs) {
        const auto dom = GridDomain::disk({0, 0}, 0.9, h, 0.3);
        QGridFunction f(dom, 1, 1);
        for (std::size_t v : dom.domain_vertices()) {
            const Vec p = dom.position(v);
            f.value(v).point(0)[0] = 0.3 * p[0] * p[0] - 0.2 * p[1];
        }
        f.rematch_all();
        defects1.push_back(std::abs(boundary_defect(make_graph_current(std::move(f)), omega3)));
    }
    CHECK(slope_fit(hs, defects1) >= 1.9);

    // Q=2 sheets of z^{3/2} over the annulus; the form is even in the fiber
    // coordinates so the two sheets do not cancel
    const auto omega4 = add(monomial_one_form(4, 1, {2, 0, 2, 0}, 0.7),
                            monomial_one_form(4, 2, {1, 1, 0, 2}, -0.4));
    std::vector<double> defects2;
    for (double h : hs) {
        const auto dom = GridDomain::disk({0, 0}, 0.9, h, 0.3);
        const auto T = pm_sheets(dom, 0.5, 1.5, 2);
        defects2.push_back(std::abs(boundary_defect(T, omega4)));
    }
    CHECK(slope_fit(hs, defects2) >= 1.9);
}

TEST_CASE("graph mass: flat, linear and branched") {
    CHECK(graph_mass_exact(flat_current(1.0 / 8, 3, 1)) == doctest::Approx(3.0).epsilon(1e-13));

    // linear graph over the unit disk: closed form pi sqrt(1+a^2) over the
    // covered cells
    const auto dom = GridDomain::disk({0, 0}, 1.0, 1.0 / 64);
    const auto T = linear_graph(dom, 0.3, 0.0);
    const double base_area = dom.domain_volume();
    CHECK(graph_mass_exact(T) ==
          doctest::Approx(std::sqrt(1.09) * base_area).epsilon(1e-12));
    CHECK(base_area == doctest::Approx(std::numbers::pi).epsilon(0.03));

    // V sheets +-z^{3/2}: the holomorphic graph area density is exactly
    // 1 + (9/4)|z| per sheet; dense quadrature over the same cells at 10x
    // resolution as the oracle
    const auto Tv = sample_on_grid(surface_V(), dom).current;
    double oracle = 0.0;
    const double h = dom.h();
    for (std::size_t cell : dom.active_cells()) {
        const Vec cc = dom.cell_center(cell);
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                const double x = cc[0] + (i - 4.5) * h / 10.0;
                const double y = cc[1] + (j - 4.5) * h / 10.0;
                oracle += 2.0 * (1.0 + 2.25 * std::hypot(x, y)) * h * h / 100.0;
            }
    }
    CHECK(graph_mass_exact(Tv) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("mass is invariant under ambient rotations of the sampled data") {
    const auto dom = GridDomain::rectangle({0, 0}, {1, 1}, 1.0 / 12);
    const auto T = pm_sheets(dom, 0.4, 1.5, 2);
    const double mass = graph_mass_exact(T);
    // rotate all simplex vertices in the (x0, x2) ambient plane
    const double c = std::cos(0.7), s = std::sin(0.7);
    double rotated_mass = 0.0;
    T.for_each_simplex([&](std::size_t, int, int, const Vec& a, const Vec& b, const Vec& d) {
        auto rot = [&](Vec p) {
            const double x = p[0], z = p[2];
            p[0] = c * x - s * z;
            p[2] = s * x + c * z;
            return p;
        };
        rotated_mass += triangle_geometry(rot(a), rot(b), rot(d)).area;
    });
    CHECK(rotated_mass == doctest::Approx(mass).epsilon(1e-10));
}

TEST_CASE("mass taylor: constants, cubic remainder, closed form") {
    const auto Tflat = flat_current(1.0 / 8, 2, 1, 1.5);
    const auto mt = graph_mass_taylor(Tflat);
    CHECK(mt.main == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(std::abs(mt.residual) <= 1e-12);

    // scaled family lambda * f0: log-log slope of the residual >= 2.9
    const auto dom = GridDomain::rectangle({0, 0}, {1, 1}, 1.0 / 32);
    std::vector<double> lambdas{0.1, 0.05, 0.025};
    std::vector<double> residuals;
    for (double lam : lambdas) {
        QGridFunction f(dom, 2, 1);
        for (std::size_t v : dom.domain_vertices()) {
            const Vec p = dom.position(v);
            const double g = 1.0 + 0.8 * p[0] + 0.5 * p[1] * p[1] + 0.3 * p[0] * p[1];
            f.value(v).point(0)[0] = lam * g;
            f.value(v).point(1)[0] = -lam * g;
        }
        f.rematch_all();
        const auto T = make_graph_current(std::move(f));
        const auto taylor = graph_mass_taylor(T);
        residuals.push_back(taylor.residual);
        CHECK(std::abs(taylor.residual) <= 10.0 * lam * cell_labelled_energy(T, nullptr));
        CHECK(!taylor.lip_warning);
    }
    CHECK(slope_fit(lambdas, residuals) >= 2.9);

    // single-valued linear graph a = 0.1 over the unit disk
    const auto disk = GridDomain::disk({0, 0}, 1.0, 1.0 / 64);
    const auto Tlin = linear_graph(disk, 0.1, 0.0);
    const auto lin = graph_mass_taylor(Tlin);
    const double per_area = std::sqrt(1.01) - 1.0 - 0.005;
    CHECK(lin.residual == doctest::Approx(per_area * disk.domain_volume()).epsilon(1e-9));
    CHECK(std::abs(lin.residual) <= 2e-5 * std::numbers::pi);

    // Lipschitz bound warning path
    const auto Tsteep = linear_graph(disk, 2.0, 0.0);
    CHECK(graph_mass_taylor(Tsteep).lip_warning);
}

TEST_CASE("cylindrical excess: closed form and dual expressions") {
    const auto dom = GridDomain::rectangle({-1, -1}, {1, 1}, 1.0 / 32);
    const auto T = linear_graph(dom, 0.3, 0.0);
    const Plane pi0(2, 1);
    const auto rep = cylindrical_excess(T, {0, 0}, 0.75, pi0);
    CHECK(rep.excess == doctest::Approx(std::sqrt(1.09) - 1.0).epsilon(1e-6));
    CHECK(rep.mass_deficit_excess == doctest::Approx(rep.excess).epsilon(1e-6));

    // the flat multiplicity-Q plane has zero excess
    const auto Tflat = flat_current(1.0 / 8, 2, 1);
    const auto flat_rep = cylindrical_excess(Tflat, {0.5, 0.5}, 0.4, Plane(2, 1));
    CHECK(std::abs(flat_rep.excess) <= 1e-12);
    CHECK(std::abs(flat_rep.mass_deficit_excess) <= 1e-12);

    // against its own tilt the excess vanishes
    Plane own(2, 1, {0.3, 0.0});
    const auto self_rep = cylindrical_excess(T, {0, 0}, 0.75, own);
    CHECK(std::abs(self_rep.excess) <= 1e-10);

    // escape is a contract violation
    CHECK_THROWS_AS(cylindrical_excess(T, {0.9, 0.0}, 0.5, pi0), contract_violation);
}

TEST_CASE("spherical excess: plane recovery on a tilted graph") {
    const auto dom = GridDomain::rectangle({-1, -1}, {1, 1}, 1.0 / 24);
    const auto T = linear_graph(dom, 0.3, -0.15);
    const auto rep = spherical_excess(T, {0, 0, 0}, 0.7);
    CHECK(rep.excess <= 1e-8);
    CHECK(rep.plane.tilt[0] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(std::abs(rep.plane.tilt[1] - (-0.15)) <= 1e-5);

    // reported optimum can only improve on the initialization plane
    const auto at_pi0 = spherical_excess_at_plane(T, {0, 0, 0}, 0.7, Plane(2, 1));
    CHECK(rep.excess <= at_pi0.excess + 1e-12);

    // single-simplex sanity: a tiny flat current recovers its own plane
    const auto tiny = linear_graph(GridDomain::rectangle({0, 0}, {0.25, 0.25}, 0.25), 0.1, 0.0);
    const auto tiny_rep = spherical_excess(tiny, {0.125, 0.125, 0.0125}, 0.4);
    CHECK(tiny_rep.excess <= 1e-10);

    CHECK_THROWS_WITH_AS(spherical_excess(T, {0, 0, 50.0}, 0.5), "empty-region",
                         contract_violation);
}

TEST_CASE("flat tangent cone of V: excess decreases, height slope 1.5") {
    const Plane pi0(2, 2);
    std::vector<double> radii{1.0, 0.5, 0.25, 0.125};
    std::vector<double> excesses, heights;
    for (double r : radii) {
        // one grid per radius keeps the relative resolution fixed; the
        // cylinder sits a couple of cells inside the sampled disk
        const int cells = 48;
        const auto dom = GridDomain::disk({0, 0}, r, r / cells);
        const auto surf = sample_on_grid(surface_V(), dom);
        const double rc = r * (1.0 - 3.0 / cells);
        const auto rep = cylindrical_excess(surf.current, {0, 0}, rc, pi0);
        excesses.push_back(rep.excess);
        heights.push_back(rep.height);
    }
    for (std::size_t i = 1; i < excesses.size(); ++i) CHECK(excesses[i] < excesses[i - 1]);
    const double slope = slope_fit(radii, heights);
    CHECK(std::abs(slope - 1.5) <= 0.1);
}

TEST_CASE("graph approximation: clean, branch-merged and defective fibers") {
    const auto dom = GridDomain::rectangle({-0.5, -0.5}, {0.5, 0.5}, 1.0 / 8);
    const auto V = surface_V();
    FiberCloud cloud;
    cloud.base = dom;
    cloud.n = 2;
    cloud.fibers.assign(dom.vertex_count(), {});
    for (std::size_t v : dom.domain_vertices()) {
        const Vec p = dom.position(v);
        cloud.fibers[v] = V.sheets(p[0], p[1]);
    }
    const auto res = graph_approximation(cloud, 2);
    CHECK(res.bad_fraction == doctest::Approx(0.0));
    CHECK(res.kept_cells.size() == dom.active_cells().size());
    // the branch vertex carries the multiplicity-2 merged cluster
    const std::size_t origin = dom.index({4, 4});
    CHECK(norm2(res.f.value(origin).xs) == doctest::Approx(0.0));

    // one stray extra point excludes exactly the adjacent cells
    auto cloud2 = cloud;
    cloud2.fibers[dom.index({4, 4})].push_back({7.0, 7.0});
    const auto res2 = graph_approximation(cloud2, 2);
    CHECK(res2.bad_vertices.size() == 1);
    CHECK(res2.bad_fraction ==
          doctest::Approx(4.0 / static_cast<double>(dom.active_cells().size())));

    // missing data excludes too
    auto cloud3 = cloud;
    cloud3.fibers[dom.index({4, 4})].clear();
    const auto res3 = graph_approximation(cloud3, 2);
    CHECK(res3.bad_vertices.size() == 1);

    // fiber csv round-trip
    save_fiber_csv(cloud, "fibers_test.csv");
    const auto loaded = load_fiber_csv(dom, 2, "fibers_test.csv");
    const auto res4 = graph_approximation(loaded, 2);
    CHECK(res4.bad_fraction == doctest::Approx(0.0));
}
