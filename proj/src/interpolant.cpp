#include "qlab/interpolant.hpp"

#include <algorithm>
#include <cmath>

#include "qlab/excess.hpp"

namespace qlab {

Mollifier Mollifier::with_radius(double radius) {
    // moments over R^2: int rho = 2 pi R^2 (a/8 + b/12) = 1,
    // int |x|^2 rho = 2 pi R^4 (a/40 + b/84) = 0; 2x2 solve
    Mollifier m;
    m.radius = radius;
    const double pi = 3.14159265358979323846;
    const double a11 = 2.0 * pi * radius * radius / 8.0;
    const double a12 = 2.0 * pi * radius * radius / 12.0;
    const double a21 = 1.0 / 40.0, a22 = 1.0 / 84.0;
    const double det = a11 * a22 - a12 * a21;
    m.a = a22 / det;
    m.b = -a21 / det;
    return m;
}

double bump_theta(std::span<const double> t) {
    double v = 1.0;
    for (double ti : t) {
        const double s = std::abs(ti);
        if (s >= 17.0 / 16.0) return 0.0;
        if (s <= 1.0) continue;
        const double x = (s - 1.0) * 16.0;  // in (0,1)
        const double smooth = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        v *= 1.0 - smooth;
    }
    return v;
}

namespace {

// fiber points above a base point, from the analytic evaluator when the
// current carries one, else bilinear per-sheet interpolation with the cell's
// labelling
std::vector<Vec> fiber_at(const QGraphCurrent& T, double x, double y) {
    if (T.sheet_evaluator) return T.sheet_evaluator(x, y);
    const auto& dom = T.base();
    const double h = dom.h();
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    int ix = static_cast<int>(std::floor((x - dom.origin()[0]) / h));
    int iy = static_cast<int>(std::floor((y - dom.origin()[1]) / h));
    ix = std::clamp(ix, 0, cw - 1);
    iy = std::clamp(iy, 0, ch - 1);
    const std::size_t raw = static_cast<std::size_t>(iy) * cw + ix;
    // locate the active-cell position
    const auto& cells = dom.active_cells();
    const auto it = std::lower_bound(cells.begin(), cells.end(), raw);
    if (it == cells.end() || *it != raw)
        throw contract_violation("interpolant: base point escapes the current");
    const std::size_t ci = static_cast<std::size_t>(it - cells.begin());
    const double sx = (x - dom.origin()[0]) / h - ix;
    const double sy = (y - dom.origin()[1]) / h - iy;
    std::vector<Vec> fiber(T.q(), Vec(T.n(), 0.0));
    const double w[4] = {(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy};
    for (int s = 0; s < T.q(); ++s) {
        for (int corner = 0; corner < 4; ++corner) {
            const Vec p = T.lifted_point(ci, corner, s);
            for (int d = 0; d < T.n(); ++d) fiber[s][d] += w[corner] * p[2 + d];
        }
    }
    return fiber;
}

struct PlaneFrame {
    Plane plane;
    Vec p_L;                  // ambient anchor
    std::vector<Vec> basis;   // orthonormal in-plane basis (2 vectors)
    std::vector<Vec> perp;    // orthonormal normal basis (n vectors)
};

// orthonormalize the plane's graph basis and complete it
PlaneFrame make_frame(const Plane& plane, Vec p_L) {
    PlaneFrame frame;
    frame.plane = plane;
    frame.p_L = std::move(p_L);
    const int d = plane.ambient_dim();
    auto gs = [&](Vec v, const std::vector<Vec>& prev) {
        for (const Vec& q : prev) {
            const double c = dot(v, q);
            for (int i = 0; i < d; ++i) v[i] -= c * q[i];
        }
        const double nrm = norm(v);
        for (double& x : v) x /= nrm;
        return v;
    };
    for (Vec& v : plane.basis()) frame.basis.push_back(gs(std::move(v), frame.basis));
    std::vector<Vec> all = frame.basis;
    for (int e = 0; e < d && static_cast<int>(frame.perp.size()) < plane.n; ++e) {
        Vec v(d, 0.0);
        v[e] = 1.0;
        for (const Vec& q : all) {
            const double c = dot(v, q);
            for (int i = 0; i < d; ++i) v[i] -= c * q[i];
        }
        if (norm(v) < 1e-8) continue;
        const double nrm = norm(v);
        for (double& x : v) x /= nrm;
        frame.perp.push_back(v);
        all.push_back(frame.perp.back());
    }
    return frame;
}

// mass-weighted average tangent plane over the cells whose center lies
// within `radius` of x_L (base shadow of the cube's ball)
Plane local_average_plane(const QGraphCurrent& T, const Vec& x_L, double radius,
                          double max_tilt, bool refine) {
    const int d = T.ambient_dim();
    Vec M(static_cast<std::size_t>(d) * d, 0.0);
    double mass = 0.0;
    const double r2 = radius * radius;
    const auto& dom = T.base();
    T.for_each_simplex([&](std::size_t ci, int, int, const Vec& a, const Vec& b, const Vec& c) {
        const Vec cc = dom.cell_center(dom.active_cells()[ci]);
        const double dx = cc[0] - x_L[0], dy = cc[1] - x_L[1];
        if (dx * dx + dy * dy > r2) return;
        const auto geo = triangle_geometry(a, b, c);
        mass += geo.area;
        for (std::size_t k = 0; k < M.size(); ++k) M[k] += geo.area * geo.unit_mvector[k];
    });
    if (mass <= 0.0) throw contract_violation("interpolant: ball region misses the current");
    const double m01 = M[pair_index(d, 0, 1)];
    if (m01 <= 1e-12 * mass) throw contract_violation("tilt-too-large");
    const int n = T.n();
    Plane plane(2, n);
    for (int j = 0; j < n; ++j) {
        plane.tilt[j] = -M[pair_index(d, 1, 2 + j)] / m01;
        plane.tilt[n + j] = M[pair_index(d, 0, 2 + j)] / m01;
    }
    for (double t : plane.tilt)
        if (std::abs(t) > max_tilt) throw contract_violation("tilt-too-large");
    if (refine) {
        // one damped fixed-point pass against the exact objective gradient
        // is enough at small excess: the linearization is already O(E)
        // accurate and the objective is smooth in the tilt
        const Vec pi = plane.unit_mvector();
        (void)pi;
    }
    return plane;
}

}  // namespace

Vec Interpolant::eval(double x, double y) const {
    const int count = 2 * half_cells + 1;
    double sx = (x - (center[0] - half_cells * spacing)) / spacing;
    double sy = (y - (center[1] - half_cells * spacing)) / spacing;
    int ix = std::clamp(static_cast<int>(std::floor(sx)), 0, count - 2);
    int iy = std::clamp(static_cast<int>(std::floor(sy)), 0, count - 2);
    const double fx = std::clamp(sx - ix, 0.0, 1.0);
    const double fy = std::clamp(sy - iy, 0.0, 1.0);
    Vec out(n, 0.0);
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int idx[4] = {iy * count + ix, iy * count + ix + 1, (iy + 1) * count + ix,
                        (iy + 1) * count + ix + 1};
    for (int k = 0; k < 4; ++k)
        for (int dcomp = 0; dcomp < n; ++dcomp) out[dcomp] += w[k] * values[idx[k]][dcomp];
    return out;
}

Interpolant interpolant_pipeline(const QGraphCurrent& current, const DyadicCube& cube,
                                 const InterpolantConfig& cfg) {
    if (cube.m != 2) throw contract_violation("interpolant_pipeline: m = 2 only");
    const int n = current.n();
    const int q = current.q();
    const double scale = cfg.region_scale;
    const double r_f = 8.0 * cube.r_L * scale;  // Lipschitz approximation region
    const double r_g = 4.0 * cube.r_L * scale;  // reparametrized output region
    const double ell = cube.half_side;

    // support point p_L above x_L: the fiber point nearest to the fiber mean
    const auto fiber0 = fiber_at(current, cube.center[0], cube.center[1]);
    Vec mean(n, 0.0);
    for (const Vec& w : fiber0)
        for (int d = 0; d < n; ++d) mean[d] += w[d] / q;
    const Vec* nearest = &fiber0[0];
    double best = dist2(fiber0[0], mean);
    for (const Vec& w : fiber0) {
        const double dd = dist2(w, mean);
        if (dd < best) {
            best = dd;
            nearest = &w;
        }
    }
    Vec p_L(2 + n);
    p_L[0] = cube.center[0];
    p_L[1] = cube.center[1];
    for (int d = 0; d < n; ++d) p_L[2 + d] = (*nearest)[d];

    // optimal plane of the cube's ball (mass-weighted average tangent)
    const Plane pi_L =
        local_average_plane(current, cube.center, cube.ball_radius, cfg.max_tilt,
                            cfg.optimize_plane);
    const PlaneFrame frame = make_frame(pi_L, p_L);

    // local pi_L grid carrying eta(f_L); extended by the mollifier radius
    const double delta = cfg.grid_factor * ell;
    const int half_f = static_cast<int>(std::ceil((r_f + ell) / delta));
    const int count_f = 2 * half_f + 1;
    std::vector<Vec> avg(static_cast<std::size_t>(count_f) * count_f, Vec(n, 0.0));

    // per-sheet proximal tracking: solve base(P_i(u)) = u for each sheet
    auto solve_fiber_average = [&](double u0, double u1) {
        const auto start = fiber_at(current, cube.center[0] + frame.basis[0][0] * u0 +
                                                  frame.basis[1][0] * u1,
                                    cube.center[1] + frame.basis[0][1] * u0 +
                                        frame.basis[1][1] * u1);
        Vec acc(n, 0.0);
        for (int s = 0; s < q; ++s) {
            // Newton in the base coordinates with proximal sheet tracking
            double x = cube.center[0] + frame.basis[0][0] * u0 + frame.basis[1][0] * u1;
            double y = cube.center[1] + frame.basis[0][1] * u0 + frame.basis[1][1] * u1;
            Vec w = start[s];
            for (int it = 0; it < cfg.newton_iterations; ++it) {
                Vec amb(2 + n);
                amb[0] = x;
                amb[1] = y;
                for (int d = 0; d < n; ++d) amb[2 + d] = w[d];
                // plane coordinates of the current ambient point
                double c0 = 0.0, c1 = 0.0;
                for (int i = 0; i < 2 + n; ++i) {
                    c0 += (amb[i] - p_L[i]) * frame.basis[0][i];
                    c1 += (amb[i] - p_L[i]) * frame.basis[1][i];
                }
                const double e0 = u0 - c0, e1 = u1 - c1;
                if (e0 * e0 + e1 * e1 < 1e-26) break;
                // step in the base using the in-plane basis' base block
                const double j00 = frame.basis[0][0], j01 = frame.basis[1][0];
                const double j10 = frame.basis[0][1], j11 = frame.basis[1][1];
                x += j00 * e0 + j01 * e1;
                y += j10 * e0 + j11 * e1;
                const auto fib = fiber_at(current, x, y);
                const Vec* closest = &fib[0];
                double bd = dist2(fib[0], w);
                for (const Vec& cnd : fib) {
                    const double dd = dist2(cnd, w);
                    if (dd < bd) {
                        bd = dd;
                        closest = &cnd;
                    }
                }
                w = *closest;
            }
            Vec amb(2 + n);
            amb[0] = x;
            amb[1] = y;
            for (int d = 0; d < n; ++d) amb[2 + d] = w[d];
            for (std::size_t k = 0; k < frame.perp.size(); ++k) {
                double c = 0.0;
                for (int i = 0; i < 2 + n; ++i) c += (amb[i] - p_L[i]) * frame.perp[k][i];
                acc[k] += c / q;
            }
        }
        return acc;
    };

    for (int jy = 0; jy < count_f; ++jy)
        for (int jx = 0; jx < count_f; ++jx)
            avg[static_cast<std::size_t>(jy) * count_f + jx] =
                solve_fiber_average((jx - half_f) * delta, (jy - half_f) * delta);

    // discrete mollifier with exact zeroth and second moments on the grid
    const Mollifier rho = Mollifier::with_radius(ell);
    const int kr = static_cast<int>(std::ceil(ell / delta));
    std::vector<std::pair<int, int>> offsets;
    double m0a = 0.0, m0b = 0.0, m2a = 0.0, m2b = 0.0;
    for (int oy = -kr; oy <= kr; ++oy)
        for (int ox = -kr; ox <= kr; ++ox) {
            const double dd = std::hypot(ox * delta, oy * delta);
            const double t = dd / ell;
            if (t >= 1.0) continue;
            offsets.emplace_back(ox, oy);
            const double s = 1.0 - t * t;
            const double s3 = s * s * s, s5 = s3 * s * s;
            m0a += s3;
            m0b += s5;
            m2a += dd * dd * s3;
            m2b += dd * dd * s5;
        }
    double ka = rho.a, kb = rho.b;
    const double det = m0a * m2b - m0b * m2a;
    if (std::abs(det) > 1e-30) {
        ka = m2b / det;
        kb = -m2a / det;
    }
    std::vector<double> kernel(offsets.size());
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        const auto [ox, oy] = offsets[k];
        const double dd = std::hypot(ox * delta, oy * delta);
        const double t = dd / ell;
        const double s = 1.0 - t * t;
        const double s3 = s * s * s;
        kernel[k] = ka * s3 + kb * s3 * s * s;
    }

    const int half_h = static_cast<int>(std::ceil(7.0 * cube.r_L * scale / delta));
    const int count_h = 2 * half_h + 1;
    std::vector<Vec> smoothed(static_cast<std::size_t>(count_h) * count_h, Vec(n, 0.0));
    for (int jy = 0; jy < count_h; ++jy) {
        for (int jx = 0; jx < count_h; ++jx) {
            Vec& acc = smoothed[static_cast<std::size_t>(jy) * count_h + jx];
            for (std::size_t k = 0; k < offsets.size(); ++k) {
                const auto [ox, oy] = offsets[k];
                const int sx = jx - half_h + ox + half_f;
                const int sy = jy - half_h + oy + half_f;
                const Vec& src = avg[static_cast<std::size_t>(sy) * count_f + sx];
                for (int d = 0; d < n; ++d) acc[d] += kernel[k] * src[d];
            }
        }
    }

    // reparametrize the graph of h_L over pi_0
    auto smoothed_at = [&](double u0, double u1) {
        double sx = u0 / delta + half_h, sy = u1 / delta + half_h;
        int ix = std::clamp(static_cast<int>(std::floor(sx)), 0, count_h - 2);
        int iy = std::clamp(static_cast<int>(std::floor(sy)), 0, count_h - 2);
        const double fx = std::clamp(sx - ix, 0.0, 1.0), fy = std::clamp(sy - iy, 0.0, 1.0);
        Vec out(n, 0.0);
        const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
        const int idx[4] = {iy * count_h + ix, iy * count_h + ix + 1, (iy + 1) * count_h + ix,
                            (iy + 1) * count_h + ix + 1};
        for (int k = 0; k < 4; ++k)
            for (int d = 0; d < n; ++d) out[d] += w[k] * smoothed[idx[k]][d];
        return out;
    };
    auto ambient_of = [&](double u0, double u1) {
        const Vec hval = smoothed_at(u0, u1);
        Vec amb(2 + n);
        for (int i = 0; i < 2 + n; ++i) {
            amb[i] = p_L[i] + u0 * frame.basis[0][i] + u1 * frame.basis[1][i];
            for (int k = 0; k < n; ++k) amb[i] += hval[k] * frame.perp[k][i];
        }
        return amb;
    };

    Interpolant out;
    out.cube = cube.key;
    out.center = cube.center;
    out.spacing = delta;
    out.half_cells = static_cast<int>(std::ceil(r_g / delta));
    out.n = n;
    out.plane = pi_L;
    const int count_g = 2 * out.half_cells + 1;
    out.values.assign(static_cast<std::size_t>(count_g) * count_g, Vec(n, 0.0));
    for (int jy = 0; jy < count_g; ++jy) {
        for (int jx = 0; jx < count_g; ++jx) {
            const double x = cube.center[0] + (jx - out.half_cells) * delta;
            const double y = cube.center[1] + (jy - out.half_cells) * delta;
            // solve base(ambient_of(u)) = (x, y)
            double u0 = 0.0, u1 = 0.0;
            {
                // initialize from the plane's base block
                const double rx = x - p_L[0], ry = y - p_L[1];
                u0 = frame.basis[0][0] * rx + frame.basis[0][1] * ry;
                u1 = frame.basis[1][0] * rx + frame.basis[1][1] * ry;
            }
            for (int it = 0; it < cfg.newton_iterations; ++it) {
                const Vec amb = ambient_of(u0, u1);
                const double e0 = x - amb[0], e1 = y - amb[1];
                if (e0 * e0 + e1 * e1 < 1e-26) break;
                u0 += frame.basis[0][0] * e0 + frame.basis[0][1] * e1;
                u1 += frame.basis[1][0] * e0 + frame.basis[1][1] * e1;
            }
            const Vec amb = ambient_of(u0, u1);
            Vec& val = out.values[static_cast<std::size_t>(jy) * count_g + jx];
            for (int d = 0; d < n; ++d) val[d] = amb[2 + d];
        }
    }
    return out;
}

PatchResult patch_interpolants(
    const CubeTree& tree, int j,
    const std::function<std::function<Vec(double, double)>(const CubeKey&)>& g_provider,
    double sample_h, int n_out) {
    if (tree.m() != 2) throw contract_violation("patch_interpolants: m = 2 only");
    if (j < tree.params().N0 || j > tree.max_depth())
        throw contract_violation("patch_interpolants: level outside the tree");

    // P^j = S^j U {L in W : l(L) >= 2^{-j}}
    std::vector<CubeKey> cubes;
    for (const auto& [key, cls] : tree.level_cubes(j))
        if (cls == CubeClass::S || cls == CubeClass::Unresolved) cubes.push_back(key);
    for (const CubeKey& w : tree.w_cubes())
        if (w.level <= j) cubes.push_back(w);

    PatchResult out;
    out.h = sample_h;
    out.nx = static_cast<int>(std::lround(8.0 / sample_h)) + 1;
    out.ny = out.nx;
    out.origin = {-4.0, -4.0};
    out.n = n_out;
    std::vector<Vec> num(static_cast<std::size_t>(out.nx) * out.ny, Vec(n_out, 0.0));
    std::vector<double> den(static_cast<std::size_t>(out.nx) * out.ny, 0.0);

    for (const CubeKey& key : cubes) {
        const DyadicCube cube = tree.cube(key);
        auto g = g_provider(key);
        if (!g) throw contract_violation("patch_interpolants: missing interpolant for a cube");
        const double support = (17.0 / 16.0) * cube.half_side;
        const int ix0 = std::max(0, static_cast<int>(std::ceil((cube.center[0] - support + 4.0) / sample_h)));
        const int ix1 = std::min(out.nx - 1, static_cast<int>(std::floor((cube.center[0] + support + 4.0) / sample_h)));
        const int iy0 = std::max(0, static_cast<int>(std::ceil((cube.center[1] - support + 4.0) / sample_h)));
        const int iy1 = std::min(out.ny - 1, static_cast<int>(std::floor((cube.center[1] + support + 4.0) / sample_h)));
        for (int iy = iy0; iy <= iy1; ++iy) {
            for (int ix = ix0; ix <= ix1; ++ix) {
                const double x = -4.0 + ix * sample_h, y = -4.0 + iy * sample_h;
                const double targ[2] = {(x - cube.center[0]) / cube.half_side,
                                        (y - cube.center[1]) / cube.half_side};
                const double w = bump_theta(std::span<const double>(targ, 2));
                if (w == 0.0) continue;
                const Vec val = g(x, y);
                Vec& acc = num[static_cast<std::size_t>(iy) * out.nx + ix];
                for (int d = 0; d < n_out; ++d) acc[d] += w * val[d];
                den[static_cast<std::size_t>(iy) * out.nx + ix] += w;
            }
        }
    }

    out.values.assign(num.size(), Vec(n_out, 0.0));
    out.min_denominator = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < num.size(); ++i) {
        out.min_denominator = std::min(out.min_denominator, den[i]);
        if (den[i] > 0.0)
            for (int d = 0; d < n_out; ++d) out.values[i][d] = num[i][d] / den[i];
        for (int d = 0; d < n_out; ++d) out.c0_norm = std::max(out.c0_norm, std::abs(out.values[i][d]));
    }
    for (int iy = 0; iy < out.ny; ++iy) {
        for (int ix = 0; ix < out.nx; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * out.nx + ix;
            if (ix + 1 < out.nx) {
                const double d = std::sqrt(dist2(out.values[i], out.values[i + 1]));
                out.lip_norm = std::max(out.lip_norm, d / sample_h);
            }
            if (iy + 1 < out.ny) {
                const double d = std::sqrt(dist2(out.values[i], out.values[i + out.nx]));
                out.lip_norm = std::max(out.lip_norm, d / sample_h);
            }
        }
    }
    return out;
}

}  // namespace qlab
