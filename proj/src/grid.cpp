#include "qlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace qlab {

namespace {

int checked_intervals(double lo, double hi, double h) {
    const double len = hi - lo;
    if (len <= 0.0 || h <= 0.0) throw contract_violation("GridDomain: empty axis or h <= 0");
    const int n = static_cast<int>(std::lround(len / h));
    if (n < 1 || std::abs(n * h - len) > 1e-9 * std::max(1.0, std::abs(len)))
        throw contract_violation("GridDomain: extent not an integer multiple of h");
    return n;
}

}  // namespace

GridDomain GridDomain::rectangle(const Vec& lo, const Vec& hi, double h) {
    if (lo.size() != hi.size() || lo.empty()) throw contract_violation("GridDomain: bad bounds");
    GridDomain g;
    g.shape_ = Shape::Rectangle;
    g.m_ = static_cast<int>(lo.size());
    g.h_ = h;
    g.origin_ = lo;
    g.n_.resize(g.m_);
    std::size_t total = 1;
    for (int a = 0; a < g.m_; ++a) {
        g.n_[a] = checked_intervals(lo[a], hi[a], h) + 1;
        total *= static_cast<std::size_t>(g.n_[a]);
    }
    g.mask_.assign(total, VertexClass::Interior);
    g.classify();
    return g;
}

GridDomain GridDomain::disk(const Vec& center, double radius, double h, double inner_radius) {
    if (center.empty() || radius <= 0.0 || h <= 0.0 || inner_radius < 0.0 ||
        inner_radius >= radius)
        throw contract_violation("GridDomain: bad disk parameters");
    GridDomain g;
    g.shape_ = Shape::Disk;
    g.m_ = static_cast<int>(center.size());
    g.h_ = h;
    g.center_ = center;
    g.radius_ = radius;
    g.inner_radius_ = inner_radius;
    // center sits on a grid vertex; one spare ring of outside vertices
    const int k = static_cast<int>(std::ceil(radius / h)) + 1;
    g.origin_.resize(g.m_);
    g.n_.assign(g.m_, 2 * k + 1);
    std::size_t total = 1;
    for (int a = 0; a < g.m_; ++a) {
        g.origin_[a] = center[a] - k * h;
        total *= static_cast<std::size_t>(g.n_[a]);
    }
    g.mask_.assign(total, VertexClass::Outside);
    const double r2_hi = (radius / h) * (radius / h) * (1.0 + 1e-12);
    const double r2_lo = inner_radius > 0.0
                             ? (inner_radius / h) * (inner_radius / h) * (1.0 - 1e-12)
                             : -1.0;
    std::vector<int> c(g.m_, 0);
    for (std::size_t v = 0; v < total; ++v) {
        std::size_t rest = v;
        double d2 = 0.0;
        for (int a = 0; a < g.m_; ++a) {
            c[a] = static_cast<int>(rest % g.n_[a]);
            rest /= g.n_[a];
            const double off = c[a] - k;
            d2 += off * off;
        }
        if (d2 <= r2_hi && d2 >= r2_lo) g.mask_[v] = VertexClass::Interior;
    }
    g.classify();
    return g;
}

std::size_t GridDomain::index(const std::vector<int>& coords) const {
    std::size_t v = 0;
    for (int a = m_ - 1; a >= 0; --a) v = v * n_[a] + coords[a];
    return v;
}

std::vector<int> GridDomain::coords(std::size_t v) const {
    std::vector<int> c(m_);
    for (int a = 0; a < m_; ++a) {
        c[a] = static_cast<int>(v % n_[a]);
        v /= n_[a];
    }
    return c;
}

Vec GridDomain::position(std::size_t v) const {
    const auto c = coords(v);
    Vec p(m_);
    for (int a = 0; a < m_; ++a) p[a] = origin_[a] + c[a] * h_;
    return p;
}

double GridDomain::cell_volume() const {
    double vol = 1.0;
    for (int a = 0; a < m_; ++a) vol *= h_;
    return vol;
}

std::vector<int> GridDomain::cell_coords(std::size_t cell) const {
    std::vector<int> c(m_);
    for (int a = 0; a < m_; ++a) {
        c[a] = static_cast<int>(cell % cell_extents_[a]);
        cell /= cell_extents_[a];
    }
    return c;
}

std::vector<std::size_t> GridDomain::cell_corners(std::size_t cell) const {
    const auto cc = cell_coords(cell);
    std::vector<std::size_t> corners(std::size_t{1} << m_);
    std::vector<int> v(m_);
    for (std::size_t bits = 0; bits < corners.size(); ++bits) {
        for (int a = 0; a < m_; ++a) v[a] = cc[a] + ((bits >> a) & 1);
        corners[bits] = index(v);
    }
    return corners;
}

Vec GridDomain::cell_center(std::size_t cell) const {
    const auto cc = cell_coords(cell);
    Vec p(m_);
    for (int a = 0; a < m_; ++a) p[a] = origin_[a] + (cc[a] + 0.5) * h_;
    return p;
}

void GridDomain::classify() {
    const std::size_t total = mask_.size();
    // boundary = in-domain vertex with an outside grid neighbor or on the box face
    for (std::size_t v = 0; v < total; ++v) {
        if (mask_[v] == VertexClass::Outside) continue;
        const auto c = coords(v);
        bool bdry = false;
        for (int a = 0; a < m_ && !bdry; ++a) {
            if (c[a] == 0 || c[a] == n_[a] - 1) {
                bdry = true;
                break;
            }
            auto cm = c;
            cm[a] -= 1;
            if (mask_[index(cm)] == VertexClass::Outside) bdry = true;
            cm[a] += 2;
            if (mask_[index(cm)] == VertexClass::Outside) bdry = true;
        }
        mask_[v] = bdry ? VertexClass::Boundary : VertexClass::Interior;
    }
    interior_.clear();
    boundary_.clear();
    in_domain_.clear();
    for (std::size_t v = 0; v < total; ++v) {
        if (mask_[v] == VertexClass::Outside) continue;
        in_domain_.push_back(v);
        if (mask_[v] == VertexClass::Boundary)
            boundary_.push_back(v);
        else
            interior_.push_back(v);
    }

    cell_extents_.resize(m_);
    std::size_t ncells = 1;
    for (int a = 0; a < m_; ++a) {
        cell_extents_[a] = n_[a] - 1;
        ncells *= static_cast<std::size_t>(cell_extents_[a]);
    }
    cell_active_.assign(ncells, 0);
    cells_.clear();
    for (std::size_t cell = 0; cell < ncells; ++cell) {
        bool active = true;
        for (std::size_t corner : cell_corners(cell)) {
            if (mask_[corner] == VertexClass::Outside) {
                active = false;
                break;
            }
        }
        if (active) {
            cell_active_[cell] = 1;
            cells_.push_back(cell);
        }
    }

    // edge weights: each active cell spreads h^m equally over its 2^(m-1)
    // parallel edges per axis, so interior edges get h^m and face edges h^m/2
    const double per_cell = cell_volume() / static_cast<double>(std::size_t{1} << (m_ - 1));
    std::unordered_map<std::uint64_t, double> acc;
    for (std::size_t cell : cells_) {
        const auto corners = cell_corners(cell);
        for (int a = 0; a < m_; ++a) {
            for (std::size_t bits = 0; bits < corners.size(); ++bits) {
                if ((bits >> a) & 1) continue;
                const std::size_t u = corners[bits];
                const std::uint64_t key = (static_cast<std::uint64_t>(u) << 3) | a;
                acc[key] += per_cell;
            }
        }
    }
    edges_.clear();
    edges_.reserve(acc.size());
    for (const auto& [key, w] : acc) {
        Edge e;
        e.a = static_cast<std::size_t>(key >> 3);
        e.axis = static_cast<int>(key & 7);
        auto c = coords(e.a);
        c[e.axis] += 1;
        e.b = index(c);
        e.weight = w;
        edges_.push_back(e);
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
        return x.a != y.a ? x.a < y.a : x.axis < y.axis;
    });
    vertex_edges_.assign(total, {});
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
        vertex_edges_[edges_[i].a].push_back(i);
        vertex_edges_[edges_[i].b].push_back(i);
    }
}

namespace {

// area of {x^2 + y^2 <= r^2} ∩ [0,a] x [0,b] for a,b >= 0
double quadrant_overlap(double a, double b, double r) {
    if (a <= 0.0 || b <= 0.0 || r <= 0.0) return 0.0;
    a = std::min(a, r);
    b = std::min(b, r);
    if (a * a + b * b <= r * r) return a * b;
    const double xs = std::sqrt(std::max(r * r - b * b, 0.0));
    auto segment = [r](double x) {  // ∫ sqrt(r^2 - t^2) dt from 0 to x
        x = std::clamp(x, -r, r);
        return 0.5 * (x * std::sqrt(std::max(r * r - x * x, 0.0)) +
                      r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
    };
    return b * xs + (segment(a) - segment(xs));
}

}  // namespace

double disk_rect_overlap(double cx, double cy, double r, double x0, double x1, double y0,
                         double y1) {
    // translate so the disk is centered at the origin, then use the signed
    // corner decomposition F(x,y) = sign(xy) * quadrant(|x|,|y|)
    auto F = [r](double x, double y) {
        const double s = (x < 0 ? -1.0 : 1.0) * (y < 0 ? -1.0 : 1.0);
        return s * quadrant_overlap(std::abs(x), std::abs(y), r);
    };
    x0 -= cx;
    x1 -= cx;
    y0 -= cy;
    y1 -= cy;
    return F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0);
}

ClipMoments disk_rect_clip_moments(double cx, double cy, double r, double x0, double x1,
                                   double y0, double y1) {
    // integrate column-wise in disk-centered coordinates; the active top and
    // bottom bounds are constant on each piece between breakpoints
    const double X0 = x0 - cx, X1 = x1 - cx, Y0 = y0 - cy, Y1 = y1 - cy;
    const double a = std::max(X0, -r), b = std::min(X1, r);
    ClipMoments out;
    if (a >= b) return out;
    std::vector<double> cuts{a, b};
    for (double y : {Y0, Y1}) {
        if (std::abs(y) < r) {
            const double x = std::sqrt(r * r - y * y);
            if (x > a && x < b) cuts.push_back(x);
            if (-x > a && -x < b) cuts.push_back(-x);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    auto Iq = [r](double x) {  // ∫ sqrt(r^2-t^2) dt
        x = std::clamp(x, -r, r);
        return 0.5 * (x * std::sqrt(std::max(r * r - x * x, 0.0)) +
                      r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
    };
    auto Ixq = [r](double x) {  // ∫ t sqrt(r^2-t^2) dt
        x = std::clamp(x, -r, r);
        return -std::pow(std::max(r * r - x * x, 0.0), 1.5) / 3.0;
    };
    auto Iq2 = [r](double x) { return r * r * x - x * x * x / 3.0; };  // ∫ (r^2-t^2) dt
    double area = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double p = cuts[k], q = cuts[k + 1];
        if (q - p < 1e-300) continue;
        const double xm = 0.5 * (p + q);
        const double sq = std::sqrt(std::max(r * r - xm * xm, 0.0));
        const bool top_circle = sq < Y1, bot_circle = -sq > Y0;
        const double ytop_m = top_circle ? sq : Y1;
        const double ybot_m = bot_circle ? -sq : Y0;
        if (ytop_m <= ybot_m) continue;
        // ∫ ytop dx, ∫ x ytop dx, ∫ ytop^2 dx (and same for ybot)
        double A_top, Mx_top, My_top, A_bot, Mx_bot, My_bot;
        if (top_circle) {
            A_top = Iq(q) - Iq(p);
            Mx_top = Ixq(q) - Ixq(p);
            My_top = Iq2(q) - Iq2(p);
        } else {
            A_top = Y1 * (q - p);
            Mx_top = Y1 * 0.5 * (q * q - p * p);
            My_top = Y1 * Y1 * (q - p);
        }
        if (bot_circle) {
            A_bot = -(Iq(q) - Iq(p));
            Mx_bot = -(Ixq(q) - Ixq(p));
            My_bot = Iq2(q) - Iq2(p);
        } else {
            A_bot = Y0 * (q - p);
            Mx_bot = Y0 * 0.5 * (q * q - p * p);
            My_bot = Y0 * Y0 * (q - p);
        }
        area += A_top - A_bot;
        mx += Mx_top - Mx_bot;
        my += 0.5 * (My_top - My_bot);
    }
    out.area = std::max(area, 0.0);
    if (out.area > 0.0) {
        out.cx = cx + mx / out.area;
        out.cy = cy + my / out.area;
    }
    return out;
}

std::vector<double> disk_cell_cover(const GridDomain& dom, const Vec& center, double r) {
    if (dom.m() != 2) throw contract_violation("disk_cell_cover: m = 2 only");
    const auto& cells = dom.active_cells();
    const double h = dom.h(), area = h * h;
    // the corner decomposition leaves roundoff residue of order eps*r^2 on
    // far cells; clip below that scale
    const double zero_tol = 1e-13 * r * r;
    std::vector<double> frac(cells.size(), 0.0);
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    std::vector<char> active_flag(static_cast<std::size_t>(cw) * ch, 0);
    for (std::size_t i = 0; i < cells.size(); ++i) active_flag[cells[i]] = 1;

    if (center[0] - r < dom.origin()[0] || center[1] - r < dom.origin()[1] ||
        center[0] + r > dom.origin()[0] + cw * h || center[1] + r > dom.origin()[1] + ch * h)
        throw contract_violation("disk_cell_cover: ball escapes the grid");
    const int ix0 = std::max(0, static_cast<int>(std::floor((center[0] - r - dom.origin()[0]) / h)));
    const int ix1 = std::min(cw - 1, static_cast<int>(std::floor((center[0] + r - dom.origin()[0]) / h)));
    const int iy0 = std::max(0, static_cast<int>(std::floor((center[1] - r - dom.origin()[1]) / h)));
    const int iy1 = std::min(ch - 1, static_cast<int>(std::floor((center[1] + r - dom.origin()[1]) / h)));
    for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
            const double x0 = dom.origin()[0] + ix * h, y0 = dom.origin()[1] + iy * h;
            const double ov = disk_rect_overlap(center[0], center[1], r, x0, x0 + h, y0, y0 + h);
            if (ov <= zero_tol) continue;
            if (!active_flag[static_cast<std::size_t>(iy) * cw + ix])
                throw contract_violation("disk_cell_cover: ball escapes the domain");
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Vec cc = dom.cell_center(cells[i]);
        const double x0 = cc[0] - 0.5 * h, y0 = cc[1] - 0.5 * h;
        const double ov = disk_rect_overlap(center[0], center[1], r, x0, x0 + h, y0, y0 + h);
        frac[i] = ov <= zero_tol ? 0.0 : std::clamp(ov / area, 0.0, 1.0);
    }
    return frac;
}

}  // namespace qlab
