#include "qlab/dirmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace qlab {

namespace {

struct Workspace {
    const GridDomain* dom = nullptr;
    int q = 0, n = 0;
    std::vector<std::size_t> nearest_boundary;  // per vertex, for the init
    std::vector<int> depth;                     // BFS hops to the boundary
    int max_depth = 0;
    std::vector<char> is_red;                   // coordinate-parity coloring
    std::vector<std::size_t> red, black;        // interior vertices by color
};

Workspace make_workspace(const GridDomain& dom, int q, int n) {
    Workspace ws;
    ws.dom = &dom;
    ws.q = q;
    ws.n = n;
    ws.nearest_boundary.assign(dom.vertex_count(), SIZE_MAX);
    ws.depth.assign(dom.vertex_count(), -1);
    std::queue<std::size_t> bfs;
    for (std::size_t v : dom.boundary_vertices()) {
        ws.nearest_boundary[v] = v;
        ws.depth[v] = 0;
        bfs.push(v);
    }
    const auto& edges = dom.edges();
    const auto& vedges = dom.vertex_edges();
    while (!bfs.empty()) {
        const std::size_t u = bfs.front();
        bfs.pop();
        for (std::uint32_t ei : vedges[u]) {
            const auto& e = edges[ei];
            const std::size_t v = (e.a == u) ? e.b : e.a;
            if (ws.nearest_boundary[v] != SIZE_MAX) continue;
            ws.nearest_boundary[v] = ws.nearest_boundary[u];
            ws.depth[v] = ws.depth[u] + 1;
            ws.max_depth = std::max(ws.max_depth, ws.depth[v]);
            bfs.push(v);
        }
    }
    ws.is_red.assign(dom.vertex_count(), 0);
    for (std::size_t v : dom.interior_vertices()) {
        const auto c = dom.coords(v);
        const int parity = std::accumulate(c.begin(), c.end(), 0) & 1;
        ws.is_red[v] = static_cast<char>(parity == 0);
        (ws.is_red[v] ? ws.red : ws.black).push_back(v);
    }
    return ws;
}

void initialize_from_trace(QGridFunction& f, const TraceData& trace, const Workspace& ws,
                           Rng& rng, bool permute_labels) {
    // Copy the nearest boundary value with the spread about its mean tapered
    // by depth: deep vertices start near-coincident, so sheet matchings
    // there are soft and the tracking sweeps can rearrange the topology
    // cheaply while the boundary structure diffuses inward.  Restart runs
    // permute the copied labels.
    const auto& dom = f.domain();
    for (std::size_t v : dom.boundary_vertices()) f.value(v) = trace.values.at(v);
    const double denom = ws.max_depth + 1;
    for (std::size_t v : dom.interior_vertices()) {
        const std::size_t b = ws.nearest_boundary[v];
        if (b == SIZE_MAX) throw contract_violation("dir_minimize: disconnected interior vertex");
        const QPoint& bp = trace.values.at(b);
        const Vec mean = eta(bp);
        const double taper = 1.0 - ws.depth[v] / denom;
        QPoint p(f.q(), f.n());
        for (int i = 0; i < f.q(); ++i) {
            const int src = permute_labels ? static_cast<int>(rng.next_below(f.q())) : i;
            for (int d = 0; d < f.n(); ++d)
                p.point(i)[d] = mean[d] + taper * (bp.point(src)[d] - mean[d]);
        }
        f.value(v) = std::move(p);
    }
}

// One red-black sweep with frozen matchings.  Returns the max residual
// |u_i(x) - weighted neighbor average| over updated vertices and sheets.
double relax_sweep(QGridFunction& f, const Workspace& ws, double omega) {
    const auto& dom = f.domain();
    const auto& edges = dom.edges();
    const auto& vedges = dom.vertex_edges();
    const int q = f.q(), n = f.n();
    double residual = 0.0;
    Vec acc(static_cast<std::size_t>(q) * n);
    for (const auto* group : {&ws.red, &ws.black}) {
        for (std::size_t v : *group) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double wsum = 0.0;
            for (std::uint32_t ei : vedges[v]) {
                const auto& e = edges[ei];
                const auto& perm = f.edge_matching(ei).perm;
                const std::size_t other = (e.a == v) ? e.b : e.a;
                const QPoint& pv = f.value(other);
                wsum += e.weight;
                if (e.a == v) {
                    // sheet i at v pairs with sheet perm[i] at other
                    for (int i = 0; i < q; ++i) {
                        auto src = pv.point(perm[i]);
                        for (int d = 0; d < n; ++d) acc[static_cast<std::size_t>(i) * n + d] += e.weight * src[d];
                    }
                } else {
                    for (int i = 0; i < q; ++i) {
                        auto src = pv.point(i);
                        for (int d = 0; d < n; ++d) acc[static_cast<std::size_t>(perm[i]) * n + d] += e.weight * src[d];
                    }
                }
            }
            QPoint& pv = f.value(v);
            for (std::size_t k = 0; k < acc.size(); ++k) {
                const double target = acc[k] / wsum;
                const double delta = target - pv.xs[k];
                residual = std::max(residual, std::abs(delta));
                pv.xs[k] += omega * delta;
            }
        }
    }
    return residual;
}

// Re-optimize every edge matching; with temperature > 0 a random non-optimal
// permutation may be accepted with Boltzmann probability.
void rematch(QGridFunction& f, Rng& rng, double temperature) {
    const auto& edges = f.domain().edges();
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
        const auto& e = edges[ei];
        Matching best = optimal_matching(f.value(e.a), f.value(e.b));
        if (temperature > 0.0) {
            const auto cand = rng.permutation(f.q());
            double cost = 0.0;
            for (int i = 0; i < f.q(); ++i)
                cost += dist2(f.value(e.a).point(i), f.value(e.b).point(cand[i]));
            const double delta = cost - best.cost;
            if (delta > 0.0 && rng.next_double() < std::exp(-delta / temperature)) {
                best.perm = cand;
                best.cost = cost;
            }
        }
        f.edge_matching(ei) = best;
    }
}

// Edge list indices of the four edges of an active cell (m = 2).
std::array<std::size_t, 4> cell_edge_indices(const GridDomain& dom, std::size_t cell) {
    const auto corners = dom.cell_corners(cell);  // 00,10,01,11
    std::array<std::pair<std::size_t, int>, 4> want = {
        std::pair<std::size_t, int>{corners[0], 0},  // bottom
        {corners[2], 0},                             // top
        {corners[0], 1},                             // left
        {corners[1], 1},                             // right
    };
    std::array<std::size_t, 4> out{};
    const auto& edges = dom.edges();
    const auto& vedges = dom.vertex_edges();
    for (int k = 0; k < 4; ++k) {
        out[k] = SIZE_MAX;
        for (std::uint32_t ei : vedges[want[k].first]) {
            const auto& e = edges[ei];
            if (e.a == want[k].first && e.axis == want[k].second) {
                out[k] = ei;
                break;
            }
        }
    }
    return out;
}

double relax_to_tol(QGridFunction& f, const Workspace& ws, double omega, int sweeps, double tol) {
    double residual = 0.0;
    for (int s = 0; s < sweeps; ++s) {
        residual = relax_sweep(f, ws, omega);
        if (residual <= tol) break;
    }
    return residual;
}

// Moves branch defects downhill by flipping single edge matchings; every
// accepted move strictly decreases the converged energy.
void polish_defects(QGridFunction& f, const Workspace& ws, const SolverConfig& cfg, double omega,
                    Rng& rng, double& energy) {
    if (cfg.defect_polish_moves <= 0 || f.domain().m() != 2 || f.q() < 2) return;
    const int q = f.q();
    std::vector<std::vector<int>> transpositions;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            std::vector<int> t(q);
            std::iota(t.begin(), t.end(), 0);
            std::swap(t[i], t[j]);
            transpositions.push_back(std::move(t));
        }
    for (int move = 0; move < cfg.defect_polish_moves; ++move) {
        const auto sel = select_sheets(f);
        if (sel.branch_cells.empty()) return;
        bool improved = false;
        for (std::size_t cell : sel.branch_cells) {
            const auto edge_ids = cell_edge_indices(f.domain(), cell);
            for (std::size_t ei : edge_ids) {
                if (ei == SIZE_MAX) continue;
                for (const auto& t : transpositions) {
                    QGridFunction trial = f;
                    auto& m = trial.edge_matching(ei);
                    m.perm = compose_perm(t, m.perm);
                    relax_to_tol(trial, ws, omega, cfg.polish_sweeps, cfg.energy_tol);
                    rematch(trial, rng, 0.0);
                    relax_to_tol(trial, ws, omega, cfg.polish_sweeps, cfg.energy_tol);
                    const double e_trial = dirichlet_energy(trial);
                    if (e_trial < energy - cfg.energy_tol) {
                        f = std::move(trial);
                        energy = e_trial;
                        improved = true;
                        break;
                    }
                }
                if (improved) break;
            }
            if (improved) break;
        }
        if (!improved) return;
    }
}

}  // namespace

DirMinResult dir_minimize(const TraceData& trace, const GridDomain& domain,
                          const SolverConfig& cfg) {
    cfg.validate();
    if (domain.boundary_vertices().empty())
        throw contract_violation("dir_minimize: domain has no boundary vertices");
    auto it0 = trace.values.begin();
    if (it0 == trace.values.end()) throw contract_violation("dir_minimize: empty trace");
    const int q = it0->second.q, n = it0->second.dim;
    trace.validate(domain, q, n);

    // canonicalize so the result is independent of the trace's internal order
    TraceData canon;
    canon.values.reserve(trace.values.size());
    for (const auto& [v, p] : trace.values) canon.values.emplace(v, canonical(p));

    const Workspace ws = make_workspace(domain, q, n);
    const double h = domain.h();
    const double span = *std::max_element(domain.extents().begin(), domain.extents().end()) * h;
    const double omega =
        cfg.over_relaxation > 0.0 ? cfg.over_relaxation : 2.0 / (1.0 + std::sin(3.141592653589793 * h / span));

    DirMinResult best;
    best.energy = std::numeric_limits<double>::infinity();

    const int runs = cfg.restarts + 1;
    for (int run = 0; run < runs; ++run) {
        Rng rng(cfg.rng_seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(run));
        QGridFunction f(domain, q, n);
        initialize_from_trace(f, canon, ws, rng, run > 0);
        f.rematch_all();
        f.freeze();
        for (int s = 0; s < cfg.init_coupled_sweeps; ++s) {
            relax_sweep(f, ws, 1.0);
            rematch(f, rng, 0.0);
        }

        std::vector<double> history;
        double energy = dirichlet_energy(f);
        double residual = 0.0;
        bool converged = false;
        int outer = 0;
        for (; outer < cfg.max_outer_iters; ++outer) {
            // (i) relax the labelled sheets with matchings frozen
            for (int s = 0; s < cfg.inner_sweeps; ++s) {
                residual = relax_sweep(f, ws, omega);
                if (residual <= cfg.energy_tol) break;
            }
            // (ii) re-optimize matchings vertex-neighborhood-wise
            const double temp =
                outer < static_cast<int>(cfg.reassignment_temperature_schedule.size())
                    ? cfg.reassignment_temperature_schedule[outer]
                    : 0.0;
            rematch(f, rng, temp);
            const double new_energy = dirichlet_energy(f);
            history.push_back(new_energy);
            const double decrease = energy - new_energy;
            energy = new_energy;
            if (std::abs(decrease) < cfg.energy_tol && residual <= cfg.energy_tol) {
                converged = true;
                ++outer;
                break;
            }
        }
        polish_defects(f, ws, cfg, omega, rng, energy);
        residual = relax_to_tol(f, ws, omega, cfg.inner_sweeps, cfg.energy_tol);
        rematch(f, rng, 0.0);
        energy = dirichlet_energy(f);
        history.push_back(energy);
        best.all_histories.push_back(history);
        if (energy < best.energy) {
            best.f = std::move(f);
            best.converged = converged;
            best.energy = energy;
            best.residual = residual;
            best.outer_iters = outer;
            best.best_restart = run;
            best.energy_history = std::move(history);
        }
    }
    return best;
}

}  // namespace qlab
