#include "qlab/excess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace qlab {

namespace {

void check_plane(const QGraphCurrent& T, const Plane& plane) {
    if (plane.m != 2 || plane.n != T.n()) throw contract_violation("excess: plane shape mismatch");
}

// orthonormal basis of the plane's orthogonal complement (n vectors in R^d)
std::vector<Vec> perp_basis(const Plane& plane) {
    const int d = plane.ambient_dim();
    std::vector<Vec> basis = plane.basis();
    std::vector<Vec> ortho;
    auto project_out = [&](Vec& v) {
        for (const Vec& q : ortho) {
            const double c = dot(v, q);
            for (int i = 0; i < d; ++i) v[i] -= c * q[i];
        }
    };
    for (Vec& v : basis) {
        project_out(v);
        const double nrm = norm(v);
        for (double& x : v) x /= nrm;
        ortho.push_back(v);
    }
    std::vector<Vec> perp;
    for (int e = 0; e < d && static_cast<int>(perp.size()) < plane.n; ++e) {
        Vec v(d, 0.0);
        v[e] = 1.0;
        project_out(v);
        for (const Vec& q : perp) {
            const double c = dot(v, q);
            for (int i = 0; i < d; ++i) v[i] -= c * q[i];
        }
        const double nrm = norm(v);
        if (nrm < 1e-8) continue;
        for (double& x : v) x /= nrm;
        perp.push_back(v);
    }
    if (static_cast<int>(perp.size()) != plane.n)
        throw contract_violation("excess: degenerate plane");
    return perp;
}

// diameter of a point set given by its coordinates in the perp basis
double point_set_diameter(std::vector<Vec>& pts) {
    if (pts.size() < 2) return 0.0;
    const int n = static_cast<int>(pts[0].size());
    if (n == 1) {
        double lo = pts[0][0], hi = pts[0][0];
        for (const Vec& p : pts) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        return hi - lo;
    }
    if (n == 2) {
        // convex hull (monotone chain) + brute force over hull vertices
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (pts.size() < 2) return 0.0;
        auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        };
        std::vector<Vec> hull(2 * pts.size());
        std::size_t k = 0;
        for (const Vec& p : pts) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
            hull[k++] = p;
        }
        const std::size_t lower = k + 1;
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
            while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
            hull[k++] = *it;
        }
        hull.resize(k > 0 ? k - 1 : 0);
        double best = 0.0;
        for (std::size_t i = 0; i < hull.size(); ++i)
            for (std::size_t j = i + 1; j < hull.size(); ++j)
                best = std::max(best, dist2(hull[i], hull[j]));
        return std::sqrt(best);
    }
    // higher codimension: deterministic subsample + brute force
    std::vector<Vec> sample;
    const std::size_t cap = 2048;
    const std::size_t stride = pts.size() > cap ? (pts.size() + cap - 1) / cap : 1;
    for (std::size_t i = 0; i < pts.size(); i += stride) sample.push_back(pts[i]);
    double best = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i + 1; j < sample.size(); ++j)
            best = std::max(best, dist2(sample[i], sample[j]));
    return std::sqrt(best);
}

double height_of_points(const QGraphCurrent& T, const Plane& plane,
                        const std::function<bool(const Vec&)>& in_region) {
    const auto perp = perp_basis(plane);
    std::vector<Vec> coords;
    const auto& cells = T.base().active_cells();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        for (int corner = 0; corner < 4; ++corner) {
            for (int s = 0; s < T.q(); ++s) {
                const Vec p = T.lifted_point(ci, corner, s);
                if (!in_region(p)) continue;
                Vec c(perp.size());
                for (std::size_t k = 0; k < perp.size(); ++k) c[k] = dot(p, perp[k]);
                coords.push_back(std::move(c));
            }
        }
    }
    return point_set_diameter(coords);
}

// in-ball area fraction of a flat triangle by recursive midpoint subdivision
double ball_fraction(const Vec& a, const Vec& b, const Vec& c, const Vec& x, double r2,
                     int depth) {
    const auto inside = [&](const Vec& p) { return dist2(p, x) <= r2; };
    const bool ia = inside(a), ib = inside(b), ic = inside(c);
    if (ia && ib && ic) return 1.0;  // flat triangle, convex ball
    if (depth == 0) {
        Vec mid(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) mid[i] = (a[i] + b[i] + c[i]) / 3.0;
        return inside(mid) ? 1.0 : 0.0;
    }
    if (!ia && !ib && !ic) {
        // quick reject when the whole triangle is far outside
        double d2 = std::min({dist2(a, x), dist2(b, x), dist2(c, x)});
        double diam2 = std::max({dist2(a, b), dist2(b, c), dist2(a, c)});
        if (d2 > r2 + diam2 + 2.0 * std::sqrt(r2 * diam2)) return 0.0;
    }
    Vec ab(a.size()), bc(a.size()), ca(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab[i] = 0.5 * (a[i] + b[i]);
        bc[i] = 0.5 * (b[i] + c[i]);
        ca[i] = 0.5 * (c[i] + a[i]);
    }
    return 0.25 * (ball_fraction(a, ab, ca, x, r2, depth - 1) +
                   ball_fraction(ab, b, bc, x, r2, depth - 1) +
                   ball_fraction(ca, bc, c, x, r2, depth - 1) +
                   ball_fraction(ab, bc, ca, x, r2, depth - 1));
}

struct BallSums {
    double mass = 0.0;
    Vec weighted_mvector;  // sum of fraction * area * tau, pair coords
};

BallSums ball_sums(const QGraphCurrent& T, const Vec& x, double r) {
    const int d = T.ambient_dim();
    BallSums out;
    out.weighted_mvector.assign(static_cast<std::size_t>(d) * d, 0.0);
    const double r2 = r * r;
    T.for_each_simplex([&](std::size_t, int, int, const Vec& a, const Vec& b, const Vec& c) {
        const double frac = ball_fraction(a, b, c, x, r2, 3);
        if (frac == 0.0) return;
        const auto geo = triangle_geometry(a, b, c);
        out.mass += frac * geo.area;
        for (std::size_t k = 0; k < out.weighted_mvector.size(); ++k)
            out.weighted_mvector[k] += frac * geo.area * geo.unit_mvector[k];
    });
    return out;
}

double excess_from_sums(const BallSums& sums, const Plane& plane, double r, int m) {
    const Vec pi = plane.unit_mvector();
    // sum w a |tau - pi|^2 = 2 mass - 2 <M, pi>
    const double tilt_integral = 2.0 * sums.mass - 2.0 * pair_dot(sums.weighted_mvector, pi);
    return tilt_integral / (2.0 * unit_ball_volume(m) * std::pow(r, m));
}

}  // namespace

double height_in_ball(const QGraphCurrent& T, const Vec& x, double r, const Plane& plane) {
    check_plane(T, plane);
    const double r2 = r * r;
    return height_of_points(T, plane, [&](const Vec& p) { return dist2(p, x) <= r2; });
}

double height_in_cylinder(const QGraphCurrent& T, const Vec& x, double r, const Plane& plane) {
    check_plane(T, plane);
    const double r2 = r * r;
    return height_of_points(T, plane, [&](const Vec& p) {
        const double dx = p[0] - x[0], dy = p[1] - x[1];
        return dx * dx + dy * dy <= r2;
    });
}

ExcessReport cylindrical_excess(const QGraphCurrent& T, const Vec& x, double r,
                                const Plane& plane) {
    check_plane(T, plane);
    if (x.size() != 2) throw contract_violation("cylindrical_excess: x must be a base point");
    const auto frac = disk_cell_cover(T.base(), x, r);  // throws on escape
    const Vec pi = plane.unit_mvector();
    double mass = 0.0, tilt_integral = 0.0;
    T.for_each_simplex([&](std::size_t ci, int, int, const Vec& a, const Vec& b, const Vec& c) {
        const double w = frac[ci];
        if (w == 0.0) return;
        const auto geo = triangle_geometry(a, b, c);
        mass += w * geo.area;
        const double dev = 2.0 - 2.0 * pair_dot(geo.unit_mvector, pi);
        tilt_integral += w * geo.area * dev;
    });
    const double norm_const = unit_ball_volume(2) * r * r;
    ExcessReport rep;
    rep.region = {RegionSpec::Kind::Cylinder, x, r};
    rep.plane = plane;
    rep.mass = mass;
    rep.excess = tilt_integral / (2.0 * norm_const);
    rep.mass_deficit_excess = mass / norm_const - T.q();
    rep.height = height_in_cylinder(T, x, r, plane);
    return rep;
}

ExcessReport spherical_excess_at_plane(const QGraphCurrent& T, const Vec& x, double r,
                                       const Plane& plane) {
    check_plane(T, plane);
    if (static_cast<int>(x.size()) != T.ambient_dim())
        throw contract_violation("spherical_excess: x must be an ambient point");
    const auto sums = ball_sums(T, x, r);
    if (sums.mass <= 0.0) throw contract_violation("empty-region");
    ExcessReport rep;
    rep.region = {RegionSpec::Kind::Ball, x, r};
    rep.plane = plane;
    rep.mass = sums.mass;
    rep.excess = excess_from_sums(sums, plane, r, 2);
    rep.mass_deficit_excess = sums.mass / (unit_ball_volume(2) * r * r) - T.q();
    rep.height = height_in_ball(T, x, r, plane);
    return rep;
}

namespace {

struct Candidate {
    double value;
    Vec tilt;
};

}  // namespace

ExcessReport spherical_excess(const QGraphCurrent& T, const Vec& x, double r,
                              const PlaneSearchConfig& cfg) {
    if (static_cast<int>(x.size()) != T.ambient_dim())
        throw contract_violation("spherical_excess: x must be an ambient point");
    const int n = T.n();
    const int dims = 2 * n;
    const auto sums = ball_sums(T, x, r);
    if (sums.mass <= 0.0) throw contract_violation("empty-region");
    const double norm_const = unit_ball_volume(2) * r * r;

    std::vector<Candidate> near_optimal;
    auto objective = [&](const Vec& tilt) {
        for (double t : tilt)
            if (std::abs(t) > cfg.max_tilt) return std::numeric_limits<double>::infinity();
        Plane p(2, n, tilt);
        const double e = excess_from_sums(sums, p, r, 2);
        near_optimal.push_back({e, tilt});
        return e;
    };

    // initialization: linearized best plane of the mass-weighted average
    // tangent 2-vector
    const int d = T.ambient_dim();
    const double m01 = sums.weighted_mvector[pair_index(d, 0, 1)];
    if (m01 <= 1e-12 * sums.mass)
        throw contract_violation("tilt-too-large: current is near-vertical over pi_0");
    Vec tilt0(dims, 0.0);
    for (int j = 0; j < n; ++j) {
        tilt0[j] = -sums.weighted_mvector[pair_index(d, 1, 2 + j)] / m01;       // row 0
        tilt0[n + j] = sums.weighted_mvector[pair_index(d, 0, 2 + j)] / m01;    // row 1
    }
    for (double t : tilt0)
        if (std::abs(t) > cfg.max_tilt) throw contract_violation("tilt-too-large");

    // deterministic Nelder-Mead
    double step = 0.05;
    for (double t : tilt0) step = std::max(step, 0.25 * std::abs(t));
    std::vector<Vec> simplex(dims + 1, tilt0);
    std::vector<double> value(dims + 1);
    for (int i = 0; i < dims; ++i) simplex[i + 1][i] += step;
    for (int i = 0; i <= dims; ++i) value[i] = objective(simplex[i]);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        // order
        std::vector<int> order(dims + 1);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
        {
            std::vector<Vec> s2(dims + 1);
            std::vector<double> v2(dims + 1);
            for (int i = 0; i <= dims; ++i) {
                s2[i] = simplex[order[i]];
                v2[i] = value[order[i]];
            }
            simplex.swap(s2);
            value.swap(v2);
        }
        double diam = 0.0;
        for (int i = 1; i <= dims; ++i)
            for (int k = 0; k < dims; ++k)
                diam = std::max(diam, std::abs(simplex[i][k] - simplex[0][k]));
        if (value[dims] - value[0] < cfg.excess_tol && diam < 1e-7) break;

        Vec centroid(dims, 0.0);
        for (int i = 0; i < dims; ++i)
            for (int k = 0; k < dims; ++k) centroid[k] += simplex[i][k] / dims;
        auto blend = [&](double t) {
            Vec p(dims);
            for (int k = 0; k < dims; ++k)
                p[k] = centroid[k] + t * (simplex[dims][k] - centroid[k]);
            return p;
        };
        const Vec refl = blend(-1.0);
        const double fr = objective(refl);
        if (fr < value[0]) {
            const Vec expa = blend(-2.0);
            const double fe = objective(expa);
            if (fe < fr) {
                simplex[dims] = expa;
                value[dims] = fe;
            } else {
                simplex[dims] = refl;
                value[dims] = fr;
            }
        } else if (fr < value[dims - 1]) {
            simplex[dims] = refl;
            value[dims] = fr;
        } else {
            const Vec contr = blend(fr < value[dims] ? -0.5 : 0.5);
            const double fc = objective(contr);
            if (fc < std::min(fr, value[dims])) {
                simplex[dims] = contr;
                value[dims] = fc;
            } else {
                for (int i = 1; i <= dims; ++i) {
                    for (int k = 0; k < dims; ++k)
                        simplex[i][k] = 0.5 * (simplex[i][k] + simplex[0][k]);
                    value[i] = objective(simplex[i]);
                }
            }
        }
    }

    const double best =
        *std::min_element(value.begin(), value.end());
    // the secondary criterion: among excess-minimizing planes, the one of
    // least height
    Plane best_plane(2, n);
    double best_height = std::numeric_limits<double>::infinity();
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& cand : near_optimal) {
        if (cand.value > best + cfg.tie_window) continue;
        Plane p(2, n, cand.tilt);
        const double hgt = height_in_ball(T, x, r, p);
        if (hgt < best_height - 1e-15) {
            best_height = hgt;
            best_plane = p;
            best_value = cand.value;
        }
    }
    ExcessReport rep;
    rep.region = {RegionSpec::Kind::Ball, x, r};
    rep.plane = best_plane;
    rep.mass = sums.mass;
    rep.excess = best_value;
    rep.mass_deficit_excess = sums.mass / norm_const - T.q();
    rep.height = best_height;
    return rep;
}

nlohmann::ordered_json excess_report_to_json(const ExcessReport& rep) {
    nlohmann::ordered_json j;
    j["region"] = {
        {"kind", rep.region.kind == RegionSpec::Kind::Cylinder ? "cylinder" : "ball"},
        {"center", rep.region.center},
        {"radius", rep.region.radius},
    };
    j["plane_tilt"] = rep.plane.tilt;
    j["excess"] = rep.excess;
    j["mass_deficit_excess"] = rep.mass_deficit_excess;
    j["height"] = rep.height;
    j["mass"] = rep.mass;
    return j;
}

void save_excess_report(const ExcessReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << excess_report_to_json(rep).dump(2) << "\n";
}

}  // namespace qlab
