#include "qlab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace qlab {

namespace {

void require_planar(const QGridFunction& f, const Vec& center) {
    if (f.domain().m() != 2) throw contract_violation("frequency: m = 2 only");
    if (center.size() != 2) throw contract_violation("frequency: center must be planar");
}

std::vector<double> disk_cover_fractions(const GridDomain& dom, const Vec& center, double r) {
    return disk_cell_cover(dom, center, r);
}

std::vector<double> vertex_norm2(const QGridFunction& f) {
    std::vector<double> out(f.domain().vertex_count(), 0.0);
    for (std::size_t v : f.domain().domain_vertices()) out[v] = f.value_norm2(v);
    return out;
}

double bilinear(const GridDomain& dom, const std::vector<double>& vals, double px, double py) {
    const double h = dom.h();
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    int ix = static_cast<int>(std::floor((px - dom.origin()[0]) / h));
    int iy = static_cast<int>(std::floor((py - dom.origin()[1]) / h));
    ix = std::clamp(ix, 0, cw - 1);
    iy = std::clamp(iy, 0, ch - 1);
    const double sx = (px - dom.origin()[0]) / h - ix;
    const double sy = (py - dom.origin()[1]) / h - iy;
    const std::size_t v00 = dom.index({ix, iy});
    const std::size_t v10 = dom.index({ix + 1, iy});
    const std::size_t v01 = dom.index({ix, iy + 1});
    const std::size_t v11 = dom.index({ix + 1, iy + 1});
    if (!dom.in_domain(v00) || !dom.in_domain(v10) || !dom.in_domain(v01) || !dom.in_domain(v11))
        throw contract_violation("frequency: interpolation point escapes the domain");
    return (1 - sx) * (1 - sy) * vals[v00] + sx * (1 - sy) * vals[v10] +
           (1 - sx) * sy * vals[v01] + sx * sy * vals[v11];
}

double ring_integral(const GridDomain& dom, const std::vector<double>& vals, const Vec& center,
                     double r) {
    const int k = std::max(64, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / dom.h())));
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double th = 2.0 * std::numbers::pi * i / k;
        sum += bilinear(dom, vals, center[0] + r * std::cos(th), center[1] + r * std::sin(th));
    }
    return sum * 2.0 * std::numbers::pi * r / k;
}

}  // namespace

double ring_integral_norm2(const QGridFunction& f, const Vec& center, double r) {
    require_planar(f, center);
    const auto vals = vertex_norm2(f);
    return ring_integral(f.domain(), vals, center, r);
}

namespace {

// |Df|^2 integrated over the exact disk: full cells carry their own finite-
// difference energy; rim cells evaluate a recovered (vertex-averaged)
// density at the clip centroid so the rim stays second-order even where the
// density peaks
double clipped_gradient_energy(const QGridFunction& f, const Vec& center, double r) {
    const auto& dom = f.domain();
    const auto& cells = dom.active_cells();
    const double h = dom.h(), area = h * h;
    const auto frac = disk_cell_cover(dom, center, r);

    // per-cell energy densities
    std::vector<double> density(cells.size(), 0.0);
    {
        const auto& edges = dom.edges();
        std::vector<double> cost(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto& edge = edges[e];
            cost[e] = optimal_matching(f.value(edge.a), f.value(edge.b)).cost;
        }
        std::unordered_map<std::uint64_t, std::uint32_t> lookup;
        lookup.reserve(edges.size() * 2);
        for (std::uint32_t e = 0; e < edges.size(); ++e)
            lookup[(static_cast<std::uint64_t>(edges[e].a) << 3) | edges[e].axis] = e;
        const double per_cell = dom.cell_volume() / 2.0;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto corners = dom.cell_corners(cells[ci]);
            double cell_energy = 0.0;
            for (int a = 0; a < 2; ++a) {
                for (std::size_t bits = 0; bits < corners.size(); ++bits) {
                    if ((bits >> a) & 1) continue;
                    const auto it =
                        lookup.find((static_cast<std::uint64_t>(corners[bits]) << 3) | a);
                    cell_energy += cost[it->second];
                }
            }
            density[ci] = cell_energy * per_cell / (h * h) / area;  // energy per unit area
        }
    }
    // recovered vertex densities = average of adjacent active cell values
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    std::vector<int> cell_pos(static_cast<std::size_t>(cw) * ch, -1);
    for (std::size_t ci = 0; ci < cells.size(); ++ci) cell_pos[cells[ci]] = static_cast<int>(ci);
    auto vertex_density = [&](int vx, int vy) {
        double sum = 0.0;
        int count = 0;
        for (int dy = -1; dy <= 0; ++dy)
            for (int dx = -1; dx <= 0; ++dx) {
                const int x = vx + dx, y = vy + dy;
                if (x < 0 || y < 0 || x >= cw || y >= ch) continue;
                const int ci = cell_pos[static_cast<std::size_t>(y) * cw + x];
                if (ci >= 0) {
                    sum += density[ci];
                    ++count;
                }
            }
        return count > 0 ? sum / count : 0.0;
    };

    double energy = 0.0;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        if (frac[ci] == 0.0) continue;
        if (frac[ci] >= 1.0 - 1e-12) {
            energy += density[ci] * area;
            continue;
        }
        const auto cc = dom.cell_coords(cells[ci]);
        const Vec cp = dom.cell_center(cells[ci]);
        const double x0 = cp[0] - 0.5 * h, y0 = cp[1] - 0.5 * h;
        const auto cm = disk_rect_clip_moments(center[0], center[1], r, x0, x0 + h, y0, y0 + h);
        if (cm.area <= 0.0) continue;
        const double sx = std::clamp((cm.cx - x0) / h, 0.0, 1.0);
        const double sy = std::clamp((cm.cy - y0) / h, 0.0, 1.0);
        const double d00 = vertex_density(cc[0], cc[1]);
        const double d10 = vertex_density(cc[0] + 1, cc[1]);
        const double d01 = vertex_density(cc[0], cc[1] + 1);
        const double d11 = vertex_density(cc[0] + 1, cc[1] + 1);
        const double rho = (1 - sx) * (1 - sy) * d00 + sx * (1 - sy) * d10 +
                           (1 - sx) * sy * d01 + sx * sy * d11;
        energy += rho * cm.area;
    }
    return energy;
}

}  // namespace

double classical_frequency(const QGridFunction& f, const Vec& center, double r) {
    require_planar(f, center);
    const double D = clipped_gradient_energy(f, center, r);
    const double H = ring_integral_norm2(f, center, r);
    if (H < kDenominatorFloor) throw degenerate_denominator("classical_frequency: zero boundary integral");
    return r * D / H;
}

SmoothedDHI smoothed_dhi(const QGridFunction& f, const Vec& center, double r) {
    require_planar(f, center);
    const auto& dom = f.domain();
    const auto& cells = dom.active_cells();
    const double h = dom.h(), area = h * h;

    const auto frac_outer = disk_cover_fractions(dom, center, r);

    // D: cutoff at cell centers, support clipped exactly
    std::vector<double> mult(cells.size(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (frac_outer[i] == 0.0) continue;
        const Vec cc = dom.cell_center(cells[i]);
        const double t = std::hypot(cc[0] - center[0], cc[1] - center[1]) / r;
        mult[i] = CutoffPhi::value(t) * frac_outer[i];
    }
    SmoothedDHI out;
    out.D = dirichlet_energy_weighted(f, mult);

    // H = 2 int_{r/2 < |x-c| < r} |f|^2 / |x-c|; cells cut by either band
    // circle are subdivided 4x4 with exact sub-areas so the clipped
    // quadrature stays second order
    const auto vals = vertex_norm2(f);
    double H = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (frac_outer[i] == 0.0) continue;
        const Vec cc = dom.cell_center(cells[i]);
        const double x0 = cc[0] - 0.5 * h, y0 = cc[1] - 0.5 * h;
        const double inner =
            disk_rect_overlap(center[0], center[1], 0.5 * r, x0, x0 + h, y0, y0 + h);
        const double band = frac_outer[i] * area - inner;
        if (band <= 1e-13 * r * r) continue;
        const bool partial = band < area * (1.0 - 1e-12);
        if (!partial) {
            const double d = std::hypot(cc[0] - center[0], cc[1] - center[1]);
            const auto corners = dom.cell_corners(cells[i]);
            double avg = 0.0;
            for (std::size_t cidx : corners) avg += vals[cidx];
            avg *= 0.25;
            H += 2.0 * band * avg / d;
            continue;
        }
        const int k = 4;
        const double sh = h / k;
        for (int sy = 0; sy < k; ++sy) {
            for (int sx = 0; sx < k; ++sx) {
                const double sx0 = x0 + sx * sh, sy0 = y0 + sy * sh;
                const double sub_outer =
                    disk_rect_overlap(center[0], center[1], r, sx0, sx0 + sh, sy0, sy0 + sh);
                const double sub_inner =
                    disk_rect_overlap(center[0], center[1], 0.5 * r, sx0, sx0 + sh, sy0,
                                      sy0 + sh);
                const double sub_band = sub_outer - sub_inner;
                if (sub_band <= 0.0) continue;
                const double px = sx0 + 0.5 * sh, py = sy0 + 0.5 * sh;
                const double d = std::hypot(px - center[0], py - center[1]);
                if (d < 1e-300) continue;
                H += 2.0 * sub_band * bilinear(dom, vals, px, py) / d;
            }
        }
    }
    out.H = H;
    if (H >= kDenominatorFloor) out.I = r * out.D / H;
    return out;
}

double richardson_classical_frequency(const QGridFunction& coarse, const QGridFunction& fine,
                                      const Vec& center, double r) {
    if (std::abs(coarse.domain().h() - 2.0 * fine.domain().h()) > 1e-12 * coarse.domain().h())
        throw contract_violation("richardson_classical_frequency: need h and h/2 samplings");
    const double ic = classical_frequency(coarse, center, r);
    const double i2 = classical_frequency(fine, center, r);
    return (4.0 * i2 - ic) / 3.0;
}

double smoothed_height_coarea(const QGridFunction& f, const Vec& center, double r, int t_nodes) {
    require_planar(f, center);
    if (t_nodes < 2) throw contract_violation("smoothed_height_coarea: need >= 2 nodes");
    if (t_nodes % 2 == 1) ++t_nodes;
    const auto vals = vertex_norm2(f);
    const double a = 0.5 * r, b = r, dt = (b - a) / t_nodes;
    double sum = 0.0;
    for (int i = 0; i <= t_nodes; ++i) {
        const double t = a + i * dt;
        const double g = ring_integral(f.domain(), vals, center, t) / t;
        const double w = (i == 0 || i == t_nodes) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * g;
    }
    return 2.0 * sum * dt / 3.0;
}

FrequencyProfile frequency_profile(const QGridFunction& f, const Vec& center, double r_min,
                                   double r_max, int steps, FrequencyVariant variant) {
    if (!(r_min > 0.0) || !(r_max > r_min) || steps < 1)
        throw contract_violation("frequency_profile: need 0 < r_min < r_max and steps >= 1");
    FrequencyProfile profile;
    profile.center = center;
    profile.variant = variant;
    profile.entries.assign(steps, FrequencyEntry{});
    const double ratio = r_max / r_min;
    // radii evaluate independently; slots keep the result thread-agnostic
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t k) {
        const double r =
            steps == 1 ? r_min
                       : r_min * std::pow(ratio, static_cast<double>(k) / (steps - 1));
        FrequencyEntry entry;
        entry.r = r;
        if (variant == FrequencyVariant::Classical) {
            entry.D = clipped_gradient_energy(f, center, r);
            entry.H = ring_integral_norm2(f, center, r);
            if (entry.H >= kDenominatorFloor) entry.I = r * entry.D / entry.H;
        } else {
            const auto dhi = smoothed_dhi(f, center, r);
            entry.D = dhi.D;
            entry.H = dhi.H;
            entry.I = dhi.I;
        }
        profile.entries[k] = entry;
    });
    return profile;
}

MonotonicityReport monotonicity_report(const FrequencyProfile& p, double tolerance) {
    std::vector<const FrequencyEntry*> defined;
    for (const auto& e : p.entries)
        if (e.I) defined.push_back(&e);
    if (defined.size() < 2) throw contract_violation("insufficient-data");
    MonotonicityReport rep;
    rep.defined_entries = static_cast<int>(defined.size());
    for (std::size_t i = 0; i < defined.size(); ++i) {
        for (std::size_t j = i + 1; j < defined.size(); ++j) {
            const double ia = *defined[i]->I, ib = *defined[j]->I;
            rep.almost_monotonicity_constant =
                std::max(rep.almost_monotonicity_constant, ia / (1.0 + ib));
            rep.largest_violation = std::max(rep.largest_violation, ia - ib);
        }
    }
    rep.largest_violation = std::max(rep.largest_violation, 0.0);
    rep.pass = rep.largest_violation <= tolerance;
    return rep;
}

void save_profile_csv(const FrequencyProfile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "r,D,H,I,defined\n";
    for (const auto& e : p.entries) {
        out << format_double(e.r) << "," << format_double(e.D) << "," << format_double(e.H)
            << ",";
        if (e.I)
            out << format_double(*e.I) << ",1\n";
        else
            out << ",0\n";
    }
}

}  // namespace qlab
