#include "qlab/current.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace qlab {

namespace {

std::vector<std::vector<int>> all_perms(int q) {
    std::vector<int> p(q);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// cost of pairing across corners a, b under labels la, lb
double edge_label_cost(const QPoint& a, const QPoint& b, const std::vector<int>& la,
                       const std::vector<int>& lb) {
    double s = 0.0;
    for (std::size_t i = 0; i < la.size(); ++i) s += dist2(a.point(la[i]), b.point(lb[i]));
    return s;
}

}  // namespace

QGraphCurrent make_graph_current(QGridFunction f) {
    if (f.domain().m() != 2) throw contract_violation("make_graph_current: m = 2 only");
    QGraphCurrent T;
    T.f_ = std::move(f);
    const auto& dom = T.f_.domain();
    const int q = T.f_.q();
    const auto& cells = dom.active_cells();
    T.labels_.resize(cells.size());

    std::vector<int> id(q);
    std::iota(id.begin(), id.end(), 0);

    if (q <= 3) {
        const auto perms = all_perms(q);
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto corners = dom.cell_corners(cells[ci]);
            const QPoint& p0 = T.f_.value(corners[0]);
            const QPoint& p1 = T.f_.value(corners[1]);
            const QPoint& p2 = T.f_.value(corners[2]);
            const QPoint& p3 = T.f_.value(corners[3]);
            double best = std::numeric_limits<double>::infinity();
            std::array<const std::vector<int>*, 3> pick = {&id, &id, &id};
            for (const auto& l1 : perms)
                for (const auto& l2 : perms)
                    for (const auto& l3 : perms) {
                        const double c = edge_label_cost(p0, p1, id, l1) +
                                         edge_label_cost(p1, p3, l1, l3) +
                                         edge_label_cost(p2, p3, l2, l3) +
                                         edge_label_cost(p0, p2, id, l2) +
                                         edge_label_cost(p0, p3, id, l3);
                        if (c < best) {
                            best = c;
                            pick = {&l1, &l2, &l3};
                        }
                    }
            T.labels_[ci] = {id, *pick[0], *pick[1], *pick[2]};
        }
    } else {
        // chained greedy for larger Q through 00->10, 00->01, 10->11
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto corners = dom.cell_corners(cells[ci]);
            const auto m01 = optimal_matching(T.f_.value(corners[0]), T.f_.value(corners[1]));
            const auto m02 = optimal_matching(T.f_.value(corners[0]), T.f_.value(corners[2]));
            const auto m13 = optimal_matching(T.f_.value(corners[1]), T.f_.value(corners[3]));
            T.labels_[ci] = {id, m01.perm, m02.perm, compose_perm(m13.perm, m01.perm)};
        }
    }
    return T;
}

Vec QGraphCurrent::lifted_point(std::size_t cell_pos, int corner, int sheet) const {
    const auto& dom = f_.domain();
    const auto corners = dom.cell_corners(dom.active_cells()[cell_pos]);
    const Vec base = dom.position(corners[corner]);
    const int slot = labels_[cell_pos][corner][sheet];
    auto fiber = f_.value(corners[corner]).point(slot);
    Vec p(static_cast<std::size_t>(2 + f_.n()));
    p[0] = base[0];
    p[1] = base[1];
    for (int d = 0; d < f_.n(); ++d) p[2 + d] = fiber[d];
    return p;
}

void QGraphCurrent::for_each_simplex(
    const std::function<void(std::size_t, int, int, const Vec&, const Vec&, const Vec&)>& fn)
    const {
    const auto& cells = f_.domain().active_cells();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        for (int s = 0; s < f_.q(); ++s) {
            // triangles (00,10,11) and (00,11,01), both counterclockwise
            const Vec p00 = lifted_point(ci, 0, s);
            const Vec p10 = lifted_point(ci, 1, s);
            const Vec p01 = lifted_point(ci, 2, s);
            const Vec p11 = lifted_point(ci, 3, s);
            fn(ci, s, 0, p00, p10, p11);
            fn(ci, s, 1, p00, p11, p01);
        }
    }
}

double pair_with_form(const QGraphCurrent& T, const TwoForm& omega) {
    if (omega.dim != T.ambient_dim()) throw contract_violation("pair_with_form: dim mismatch");
    const int d = omega.dim;
    double total = 0.0;
    Vec mid(d), u(d), v(d);
    T.for_each_simplex([&](std::size_t, int, int, const Vec& a, const Vec& b, const Vec& c) {
        for (int i = 0; i < d; ++i) {
            mid[i] = (a[i] + b[i] + c[i]) / 3.0;
            u[i] = b[i] - a[i];
            v[i] = c[i] - a[i];
        }
        // <omega, u ^ v> / 2: the wedge carries area times tau
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const double w = u[i] * v[j] - u[j] * v[i];
                if (w != 0.0) s += omega.coeff(i, j, mid) * w;
            }
        total += 0.5 * s;
    });
    return total;
}

namespace {

// counterclockwise boundary sides of the active cell set
struct BoundarySegment {
    std::size_t cell_pos;
    int corner_from, corner_to;
};

std::vector<BoundarySegment> boundary_segments(const GridDomain& dom) {
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    std::vector<char> active(static_cast<std::size_t>(cw) * ch, 0);
    const auto& cells = dom.active_cells();
    for (std::size_t c : cells) active[c] = 1;
    std::vector<BoundarySegment> segs;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const int x = static_cast<int>(cells[ci] % cw), y = static_cast<int>(cells[ci] / cw);
        auto missing = [&](int nx, int ny) {
            return nx < 0 || ny < 0 || nx >= cw || ny >= ch ||
                   !active[static_cast<std::size_t>(ny) * cw + nx];
        };
        // corner order 00,10,01,11; ccw sides: bottom, right, top, left
        if (missing(x, y - 1)) segs.push_back({ci, 0, 1});
        if (missing(x + 1, y)) segs.push_back({ci, 1, 3});
        if (missing(x, y + 1)) segs.push_back({ci, 3, 2});
        if (missing(x - 1, y)) segs.push_back({ci, 2, 0});
    }
    return segs;
}

}  // namespace

double boundary_pairing(const QGraphCurrent& T, const OneForm& omega) {
    if (omega.dim != T.ambient_dim()) throw contract_violation("boundary_pairing: dim mismatch");
    const int d = omega.dim;
    double total = 0.0;
    Vec mid(d);
    for (const auto& seg : boundary_segments(T.base())) {
        for (int s = 0; s < T.q(); ++s) {
            const Vec a = T.lifted_point(seg.cell_pos, seg.corner_from, s);
            const Vec b = T.lifted_point(seg.cell_pos, seg.corner_to, s);
            for (int i = 0; i < d; ++i) mid[i] = 0.5 * (a[i] + b[i]);
            for (int i = 0; i < d; ++i) {
                const double dx = b[i] - a[i];
                if (dx != 0.0) total += omega.coeff(i, mid) * dx;
            }
        }
    }
    return total;
}

double boundary_defect(const QGraphCurrent& T, const OneForm& omega) {
    return pair_with_form(T, exterior_derivative(omega)) - boundary_pairing(T, omega);
}

double graph_mass_exact(const QGraphCurrent& T) {
    double mass = 0.0;
    T.for_each_simplex([&](std::size_t, int, int, const Vec& a, const Vec& b, const Vec& c) {
        mass += triangle_geometry(a, b, c).area;
    });
    return mass;
}

double cell_labelled_energy(const QGraphCurrent& T, const std::vector<double>* cell_multiplier) {
    // P1 gradient energy of the labelled triangles; equals the edgewise
    // matched finite-difference energy whenever the labels induce the
    // optimal edge matchings
    const double h = T.base().h();
    const double tri_area = 0.5 * h * h;
    double energy = 0.0;
    T.for_each_simplex([&](std::size_t ci, int, int tri, const Vec& a, const Vec& b, const Vec& c) {
        const double mult = cell_multiplier ? (*cell_multiplier)[ci] : 1.0;
        if (mult == 0.0) return;
        double g2 = 0.0;
        for (int dc = 2; dc < static_cast<int>(a.size()); ++dc) {
            double gx, gy;
            if (tri == 0) {  // (00,10,11): x-leg a->b, y-leg b->c
                gx = (b[dc] - a[dc]) / h;
                gy = (c[dc] - b[dc]) / h;
            } else {  // (00,11,01): y-leg a->c, x-leg c->b
                gy = (c[dc] - a[dc]) / h;
                gx = (b[dc] - c[dc]) / h;
            }
            g2 += gx * gx + gy * gy;
        }
        energy += mult * g2 * tri_area;
    });
    return energy;
}

double lipschitz_estimate(const QGraphCurrent& T) {
    const auto& dom = T.base();
    const double h = dom.h();
    const int q = T.q();
    double lip = 0.0;
    const auto& cells = dom.active_cells();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto corners = dom.cell_corners(cells[ci]);
        const auto& lab = T.labels()[ci];
        auto pair_dist = [&](int ca, int cb, double len) {
            const QPoint& pa = T.function().value(corners[ca]);
            const QPoint& pb = T.function().value(corners[cb]);
            for (int s = 0; s < q; ++s) {
                const double d = std::sqrt(dist2(pa.point(lab[ca][s]), pb.point(lab[cb][s])));
                lip = std::max(lip, d / len);
            }
        };
        pair_dist(0, 1, h);
        pair_dist(1, 3, h);
        pair_dist(2, 3, h);
        pair_dist(0, 2, h);
        pair_dist(0, 3, h * std::numbers::sqrt2);
    }
    return lip;
}

MassTaylor graph_mass_taylor(const QGraphCurrent& T, double lip_bound) {
    MassTaylor out;
    out.lipschitz = lipschitz_estimate(T);
    out.lip_warning = out.lipschitz > lip_bound;
    const double omega_area = T.base().domain_volume();
    out.main = T.q() * omega_area + 0.5 * cell_labelled_energy(T, nullptr);
    out.residual = graph_mass_exact(T) - out.main;
    return out;
}

}  // namespace qlab
