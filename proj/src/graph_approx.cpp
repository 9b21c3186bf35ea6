#include "qlab/graph_approx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace qlab {

namespace {

struct Cluster {
    Vec center;
    int count = 0;
};

std::vector<Cluster> cluster_points(const std::vector<Vec>& pts, double tol) {
    std::vector<Cluster> out;
    for (const Vec& p : pts) {
        bool placed = false;
        for (auto& c : out) {
            if (std::sqrt(dist2(p, c.center)) <= tol) {
                for (std::size_t i = 0; i < p.size(); ++i)
                    c.center[i] = (c.center[i] * c.count + p[i]) / (c.count + 1);
                c.count += 1;
                placed = true;
                break;
            }
        }
        if (!placed) out.push_back({p, 1});
    }
    return out;
}

}  // namespace

GraphApproxResult graph_approximation(const FiberCloud& samples, int Q, double cluster_tol) {
    if (Q <= 0) throw contract_violation("graph_approximation: Q must be positive");
    const auto& dom = samples.base;
    GraphApproxResult out;
    out.f = QGridFunction(dom, Q, samples.n);
    std::vector<char> good(dom.vertex_count(), 0);

    for (std::size_t v : dom.domain_vertices()) {
        const auto& fiber = samples.fibers[v];
        const auto clusters = cluster_points(fiber, cluster_tol);
        int total = 0;
        for (const auto& c : clusters) total += c.count;
        if (total == Q) {
            good[v] = 1;
            QPoint& p = out.f.value(v);
            int slot = 0;
            for (const auto& c : clusters)
                for (int k = 0; k < c.count; ++k) {
                    std::copy(c.center.begin(), c.center.end(), p.point(slot).begin());
                    ++slot;
                }
        } else {
            out.bad_vertices.push_back(v);
            // placeholder value: Q copies of the fiber mean (zero if empty)
            Vec mean(samples.n, 0.0);
            if (!fiber.empty()) {
                for (const Vec& q : fiber)
                    for (int d = 0; d < samples.n; ++d) mean[d] += q[d];
                for (double& x : mean) x /= static_cast<double>(fiber.size());
            }
            QPoint& p = out.f.value(v);
            for (int s = 0; s < Q; ++s)
                std::copy(mean.begin(), mean.end(), p.point(s).begin());
        }
    }
    const auto& cells = dom.active_cells();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto corners = dom.cell_corners(cells[ci]);
        bool keep = true;
        for (std::size_t corner : corners)
            if (!good[corner]) keep = false;
        if (keep) out.kept_cells.push_back(ci);
    }
    out.bad_fraction =
        cells.empty() ? 0.0
                      : 1.0 - static_cast<double>(out.kept_cells.size()) / cells.size();
    out.f.rematch_all();
    return out;
}

void save_fiber_csv(const FiberCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "vertex";
    for (int d = 0; d < cloud.n; ++d) out << ",y" << d;
    out << "\n";
    for (std::size_t v : cloud.base.domain_vertices()) {
        for (const Vec& p : cloud.fibers[v]) {
            out << v;
            for (double x : p) out << "," << format_double(x);
            out << "\n";
        }
    }
}

FiberCloud load_fiber_csv(GridDomain base, int n, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    FiberCloud cloud;
    cloud.base = std::move(base);
    cloud.n = n;
    cloud.fibers.assign(cloud.base.vertex_count(), {});
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t next = line.find(',', pos);
            if (next == std::string::npos) next = line.size();
            row.push_back(std::strtod(line.c_str() + pos, nullptr));
            pos = next + 1;
        }
        if (static_cast<int>(row.size()) != n + 1)
            throw std::runtime_error("fiber csv: bad row width");
        const std::size_t v = static_cast<std::size_t>(row[0]);
        if (v >= cloud.base.vertex_count()) throw std::runtime_error("fiber csv: bad vertex");
        cloud.fibers[v].push_back(Vec(row.begin() + 1, row.end()));
    }
    return cloud;
}

}  // namespace qlab
