#include "qlab/qfunc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace qlab {

QGridFunction::QGridFunction(GridDomain domain, int q, int n)
    : domain_(std::move(domain)), q_(q), n_(n) {
    if (q <= 0 || n <= 0) throw contract_violation("QGridFunction: q and n must be positive");
    values_.assign(domain_.vertex_count(), QPoint(q, n));
    Matching id;
    id.perm.resize(q);
    std::iota(id.perm.begin(), id.perm.end(), 0);
    matchings_.assign(domain_.edges().size(), id);
}

void QGridFunction::rematch_all() {
    const auto& edges = domain_.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        matchings_[e] = optimal_matching(values_[edges[e].a], values_[edges[e].b]);
    frozen_ = false;
}

double QGridFunction::value_norm2(std::size_t v) const {
    return norm2(values_[v].xs);
}

void TraceData::validate(const GridDomain& domain, int q, int n) const {
    const auto& bdry = domain.boundary_vertices();
    if (values.size() != bdry.size())
        throw contract_violation("TraceData: does not cover the boundary vertex set exactly");
    for (std::size_t v : bdry) {
        auto it = values.find(v);
        if (it == values.end()) throw contract_violation("TraceData: missing boundary vertex");
        if (it->second.q != q || it->second.dim != n)
            throw contract_violation("TraceData: q/n mismatch");
    }
}

namespace {

double edge_cost(const QGridFunction& f, std::size_t e) {
    const auto& edge = f.domain().edges()[e];
    if (f.frozen()) {
        const auto& m = f.edge_matching(e);
        double s = 0.0;
        for (int i = 0; i < f.q(); ++i)
            s += dist2(f.value(edge.a).point(i), f.value(edge.b).point(m.perm[i]));
        return s;
    }
    return optimal_matching(f.value(edge.a), f.value(edge.b)).cost;
}

}  // namespace

double dirichlet_energy(const QGridFunction& f) {
    const auto& edges = f.domain().edges();
    const double inv_h2 = 1.0 / (f.domain().h() * f.domain().h());
    double energy = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
        energy += edges[e].weight * edge_cost(f, e) * inv_h2;
    return energy;
}

double dirichlet_energy_weighted(const QGridFunction& f,
                                 const std::vector<double>& cell_multiplier) {
    const auto& dom = f.domain();
    const int m = dom.m();
    const double h2 = dom.h() * dom.h();
    const double per_cell = dom.cell_volume() / static_cast<double>(std::size_t{1} << (m - 1));

    // per-edge costs, indexed like dom.edges()
    const auto& edges = dom.edges();
    std::vector<double> cost(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) cost[e] = edge_cost(f, e);

    // lookup (vertex, axis) -> edge id
    std::unordered_map<std::uint64_t, std::uint32_t> lookup;
    lookup.reserve(edges.size() * 2);
    for (std::uint32_t e = 0; e < edges.size(); ++e)
        lookup[(static_cast<std::uint64_t>(edges[e].a) << 3) | edges[e].axis] = e;

    double energy = 0.0;
    const auto& cells = dom.active_cells();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const double mult = cell_multiplier[ci];
        if (mult == 0.0) continue;
        const auto corners = dom.cell_corners(cells[ci]);
        double cell_energy = 0.0;
        for (int a = 0; a < m; ++a) {
            for (std::size_t bits = 0; bits < corners.size(); ++bits) {
                if ((bits >> a) & 1) continue;
                const auto it =
                    lookup.find((static_cast<std::uint64_t>(corners[bits]) << 3) | a);
                cell_energy += cost[it->second];
            }
        }
        energy += mult * cell_energy * per_cell / h2;
    }
    return energy;
}

namespace {

struct EdgePermLookup {
    // (min vertex << 3 | axis) -> permutation a->b along +axis
    std::unordered_map<std::uint64_t, std::vector<int>> perms;

    static EdgePermLookup build(const QGridFunction& f) {
        EdgePermLookup out;
        const auto& edges = f.domain().edges();
        out.perms.reserve(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto& edge = edges[e];
            const std::vector<int> perm =
                f.frozen() ? f.edge_matching(e).perm
                           : optimal_matching(f.value(edge.a), f.value(edge.b)).perm;
            out.perms[(static_cast<std::uint64_t>(edge.a) << 3) | edge.axis] = perm;
        }
        return out;
    }

    // permutation carrying labels from u to its +axis/-axis neighbor v
    const std::vector<int>* forward(std::size_t a, int axis) const {
        auto it = perms.find((static_cast<std::uint64_t>(a) << 3) | axis);
        return it == perms.end() ? nullptr : &it->second;
    }
};

std::vector<int> identity_perm(int q) {
    std::vector<int> p(q);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

}  // namespace

std::vector<int> loop_holonomy(const QGridFunction& f, const std::vector<std::size_t>& loop) {
    const auto lookup = EdgePermLookup::build(f);
    const auto& dom = f.domain();
    std::vector<int> h = identity_perm(f.q());
    for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
        const std::size_t u = loop[k], v = loop[k + 1];
        const auto cu = dom.coords(u), cv = dom.coords(v);
        int axis = -1, dir = 0;
        for (int a = 0; a < dom.m(); ++a) {
            if (cu[a] != cv[a]) {
                axis = a;
                dir = cv[a] - cu[a];
            }
        }
        if (axis < 0 || std::abs(dir) != 1)
            throw contract_violation("loop_holonomy: consecutive vertices are not neighbors");
        const std::vector<int>* p = dir > 0 ? lookup.forward(u, axis) : lookup.forward(v, axis);
        if (!p) throw contract_violation("loop_holonomy: loop leaves the active edge set");
        h = dir > 0 ? compose_perm(*p, h) : compose_perm(inverse_perm(*p), h);
    }
    return h;
}

SheetSelection select_sheets(const QGridFunction& f) {
    const auto& dom = f.domain();
    if (dom.m() != 2) throw contract_violation("select_sheets: m = 2 only");
    const int q = f.q();
    const auto lookup = EdgePermLookup::build(f);

    SheetSelection out;
    const auto& verts = dom.domain_vertices();
    if (verts.empty()) return out;

    // BFS labels: L(v) maps selection sheet j to storage slot L(v)[j]
    std::vector<std::vector<int>> label(dom.vertex_count());
    std::vector<char> seen(dom.vertex_count(), 0);
    const auto& edges = dom.edges();
    const auto& vedges = dom.vertex_edges();
    for (std::size_t root : verts) {
        if (seen[root]) continue;
        seen[root] = 1;
        label[root] = identity_perm(q);
        std::queue<std::size_t> bfs;
        bfs.push(root);
        while (!bfs.empty()) {
            const std::size_t u = bfs.front();
            bfs.pop();
            for (std::uint32_t ei : vedges[u]) {
                const auto& e = edges[ei];
                const std::size_t v = (e.a == u) ? e.b : e.a;
                if (seen[v]) continue;
                const std::vector<int>* p = lookup.forward(e.a, e.axis);
                seen[v] = 1;
                label[v] = (e.a == u) ? compose_perm(*p, label[u])
                                      : compose_perm(inverse_perm(*p), label[u]);
                bfs.push(v);
            }
        }
    }

    out.selections.assign(q, std::vector<Vec>(dom.vertex_count()));
    for (std::size_t v : verts) {
        for (int j = 0; j < q; ++j) {
            auto pt = f.value(v).point(label[v][j]);
            out.selections[j][v] = Vec(pt.begin(), pt.end());
        }
    }

    // plaquette holonomy over active cells
    auto cell_holonomy = [&](std::size_t cell) {
        const auto corners = dom.cell_corners(cell);  // 00,10,01,11
        std::vector<int> h = identity_perm(q);
        h = compose_perm(*lookup.forward(corners[0], 0), h);                  // 00 -> 10
        h = compose_perm(*lookup.forward(corners[1], 1), h);                  // 10 -> 11
        h = compose_perm(inverse_perm(*lookup.forward(corners[2], 0)), h);    // 11 -> 01
        h = compose_perm(inverse_perm(*lookup.forward(corners[0], 1)), h);    // 01 -> 00
        return h;
    };
    const std::vector<int> id = identity_perm(q);
    std::unordered_map<std::size_t, char> active_branched;
    for (std::size_t cell : dom.active_cells()) {
        if (cell_holonomy(cell) != id) {
            out.branch_cells.push_back(cell);
            active_branched[cell] = 1;
        }
    }

    // enclosed holes: non-active-cell components not reaching the grid edge;
    // a non-identity loop around such a hole obstructs global selection even
    // when every active plaquette is trivial
    const int cw = dom.extents()[0] - 1, ch = dom.extents()[1] - 1;
    std::vector<char> active(static_cast<std::size_t>(cw) * ch, 0);
    for (std::size_t cell : dom.active_cells()) active[cell] = 1;
    std::vector<int> comp(static_cast<std::size_t>(cw) * ch, -1);
    int ncomp = 0;
    std::vector<std::vector<std::size_t>> comp_cells;
    std::vector<char> comp_touches_edge;
    for (std::size_t c0 = 0; c0 < active.size(); ++c0) {
        if (active[c0] || comp[c0] >= 0) continue;
        comp_cells.emplace_back();
        comp_touches_edge.push_back(0);
        std::queue<std::size_t> bfs;
        bfs.push(c0);
        comp[c0] = ncomp;
        while (!bfs.empty()) {
            const std::size_t c = bfs.front();
            bfs.pop();
            comp_cells[ncomp].push_back(c);
            const int x = static_cast<int>(c % cw), y = static_cast<int>(c / cw);
            if (x == 0 || y == 0 || x == cw - 1 || y == ch - 1) comp_touches_edge[ncomp] = 1;
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int nx = x + dx[k], ny = y + dy[k];
                if (nx < 0 || ny < 0 || nx >= cw || ny >= ch) continue;
                const std::size_t nc = static_cast<std::size_t>(ny) * cw + nx;
                if (active[nc] || comp[nc] >= 0) continue;
                comp[nc] = ncomp;
                bfs.push(nc);
            }
        }
        ++ncomp;
    }
    for (int k = 0; k < ncomp; ++k) {
        if (comp_touches_edge[k]) continue;
        // enclosing rectangle of the hole, expanded until its perimeter loop
        // lies entirely in the active edge set
        int x0 = cw, x1 = -1, y0 = ch, y1 = -1;
        for (std::size_t c : comp_cells[k]) {
            const int x = static_cast<int>(c % cw), y = static_cast<int>(c / cw);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        for (int grow = 1; grow < std::max(cw, ch); ++grow) {
            const int gx0 = x0 - grow, gx1 = x1 + grow, gy0 = y0 - grow, gy1 = y1 + grow;
            if (gx0 < 0 || gy0 < 0 || gx1 >= cw || gy1 >= ch) break;
            std::vector<std::size_t> loop;
            bool ok = true;
            auto push = [&](int vx, int vy) { loop.push_back(dom.index({vx, vy})); };
            for (int x = gx0; x <= gx1 + 1 && ok; ++x) push(x, gy0);
            for (int y = gy0 + 1; y <= gy1 + 1 && ok; ++y) push(gx1 + 1, y);
            for (int x = gx1; x >= gx0 && ok; --x) push(x, gy1 + 1);
            for (int y = gy1; y >= gy0 && ok; --y) push(gx0, y);
            // all loop edges must be active cell edges
            for (std::size_t i = 0; ok && i + 1 < loop.size(); ++i) {
                const auto cu = dom.coords(loop[i]), cv = dom.coords(loop[i + 1]);
                const int axis = (cu[0] != cv[0]) ? 0 : 1;
                const std::size_t lo = (cu[axis] < cv[axis]) ? loop[i] : loop[i + 1];
                if (!lookup.forward(lo, axis)) ok = false;
            }
            if (!ok) continue;
            // attribute to the hole only when no reported plaquette inside
            // the rectangle already explains the monodromy
            bool explained = false;
            for (int y = gy0; y <= gy1 && !explained; ++y)
                for (int x = gx0; x <= gx1 && !explained; ++x)
                    if (active_branched.count(static_cast<std::size_t>(y) * cw + x))
                        explained = true;
            if (!explained && loop_holonomy(f, loop) != id)
                for (std::size_t c : comp_cells[k]) out.branch_cells.push_back(c);
            break;
        }
    }
    std::sort(out.branch_cells.begin(), out.branch_cells.end());
    out.selection_exists = out.branch_cells.empty();
    return out;
}

double holder_seminorm(const QGridFunction& f, double kappa) {
    if (kappa <= 0.0 || kappa > 1.0) throw contract_violation("holder_seminorm: kappa in (0,1]");
    const auto& dom = f.domain();
    std::vector<std::size_t> sample = dom.domain_vertices();
    const std::size_t cap = 10000;
    if (sample.size() > cap) {
        const std::size_t stride = (sample.size() + cap - 1) / cap;
        std::vector<std::size_t> sub;
        for (std::size_t i = 0; i < sample.size(); i += stride) sub.push_back(sample[i]);
        sample.swap(sub);
    }
    double best = 0.0;
    std::vector<Vec> pos(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) pos[i] = dom.position(sample[i]);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
            const double d = std::sqrt(dist2(pos[i], pos[j]));
            const double g = g_dist(f.value(sample[i]), f.value(sample[j]));
            best = std::max(best, g / std::pow(d, kappa));
        }
    }
    return best;
}

// ---- serialization ----------------------------------------------------

nlohmann::ordered_json domain_to_json(const GridDomain& d) {
    nlohmann::ordered_json j;
    if (d.shape() == GridDomain::Shape::Rectangle) {
        j["shape"] = "rectangle";
        nlohmann::ordered_json lo = nlohmann::ordered_json::array(),
                               hi = nlohmann::ordered_json::array();
        for (int a = 0; a < d.m(); ++a) {
            lo.push_back(d.origin()[a]);
            hi.push_back(d.origin()[a] + (d.extents()[a] - 1) * d.h());
        }
        j["lo"] = lo;
        j["hi"] = hi;
    } else {
        j["shape"] = "disk";
        j["center"] = d.disk_center();
        j["radius"] = d.disk_radius();
        j["inner_radius"] = d.disk_inner_radius();
    }
    j["h"] = d.h();
    j["m"] = d.m();
    return j;
}

GridDomain domain_from_json(const nlohmann::json& j) {
    const std::string shape = j.at("shape").get<std::string>();
    const double h = j.at("h").get<double>();
    if (shape == "rectangle")
        return GridDomain::rectangle(j.at("lo").get<Vec>(), j.at("hi").get<Vec>(), h);
    if (shape == "disk")
        return GridDomain::disk(j.at("center").get<Vec>(), j.at("radius").get<double>(), h,
                                j.value("inner_radius", 0.0));
    throw contract_violation("domain_from_json: unknown shape");
}

namespace {

void write_vertex_rows(std::ofstream& out, const QGridFunction& f,
                       const std::vector<std::size_t>& verts) {
    const auto& dom = f.domain();
    out << "vertex";
    for (int a = 0; a < dom.m(); ++a) out << ",x" << a;
    for (int i = 0; i < f.q(); ++i)
        for (int d = 0; d < f.n(); ++d) out << ",p" << i << "_" << d;
    out << "\n";
    for (std::size_t v : verts) {
        out << v;
        const Vec p = dom.position(v);
        for (double x : p) out << "," << format_double(x);
        const QPoint c = canonical(f.value(v));
        for (double x : c.xs) out << "," << format_double(x);
        out << "\n";
    }
}

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t next = line.find(',', pos);
        if (next == std::string::npos) next = line.size();
        out.push_back(std::strtod(line.c_str() + pos, nullptr));
        pos = next + 1;
    }
    return out;
}

}  // namespace

void save_qgrid_function(const QGridFunction& f, const std::string& header_path,
                         const std::string& table_path) {
    nlohmann::ordered_json j;
    j["format"] = "qlab-qfunc";
    j["domain"] = domain_to_json(f.domain());
    j["q"] = f.q();
    j["n"] = f.n();
    std::ofstream hout(header_path);
    if (!hout) throw std::runtime_error("cannot write " + header_path);
    hout << j.dump(2) << "\n";
    std::ofstream tout(table_path);
    if (!tout) throw std::runtime_error("cannot write " + table_path);
    write_vertex_rows(tout, f, f.domain().domain_vertices());
}

QGridFunction load_qgrid_function(const std::string& header_path, const std::string& table_path) {
    std::ifstream hin(header_path);
    if (!hin) throw std::runtime_error("cannot read " + header_path);
    nlohmann::json j = nlohmann::json::parse(hin);
    QGridFunction f(domain_from_json(j.at("domain")), j.at("q").get<int>(), j.at("n").get<int>());
    std::ifstream tin(table_path);
    if (!tin) throw std::runtime_error("cannot read " + table_path);
    std::string line;
    std::getline(tin, line);  // header
    const std::size_t expect = 1 + f.domain().m() + static_cast<std::size_t>(f.q()) * f.n();
    while (std::getline(tin, line)) {
        if (line.empty()) continue;
        const auto row = parse_csv_row(line);
        if (row.size() != expect) throw std::runtime_error("qfunc table: bad row width");
        const std::size_t v = static_cast<std::size_t>(row[0]);
        if (v >= f.domain().vertex_count()) throw std::runtime_error("qfunc table: bad vertex");
        std::copy(row.begin() + 1 + f.domain().m(), row.end(), f.value(v).xs.begin());
    }
    f.rematch_all();
    return f;
}

void save_trace(const TraceData& trace, const GridDomain& domain, int q, int n,
                const std::string& header_path, const std::string& table_path) {
    trace.validate(domain, q, n);
    QGridFunction tmp(domain, q, n);
    for (const auto& [v, p] : trace.values) tmp.value(v) = p;
    nlohmann::ordered_json j;
    j["format"] = "qlab-trace";
    j["domain"] = domain_to_json(domain);
    j["q"] = q;
    j["n"] = n;
    std::ofstream hout(header_path);
    if (!hout) throw std::runtime_error("cannot write " + header_path);
    hout << j.dump(2) << "\n";
    std::ofstream tout(table_path);
    if (!tout) throw std::runtime_error("cannot write " + table_path);
    write_vertex_rows(tout, tmp, domain.boundary_vertices());
}

TraceData load_trace(const GridDomain& domain, int q, int n, const std::string& table_path) {
    std::ifstream tin(table_path);
    if (!tin) throw std::runtime_error("cannot read " + table_path);
    std::string line;
    std::getline(tin, line);
    TraceData trace;
    const std::size_t expect = 1 + domain.m() + static_cast<std::size_t>(q) * n;
    while (std::getline(tin, line)) {
        if (line.empty()) continue;
        const auto row = parse_csv_row(line);
        if (row.size() != expect) throw std::runtime_error("trace table: bad row width");
        const std::size_t v = static_cast<std::size_t>(row[0]);
        QPoint p(q, n, Vec(row.begin() + 1 + domain.m(), row.end()));
        trace.values.emplace(v, std::move(p));
    }
    return trace;
}

}  // namespace qlab
