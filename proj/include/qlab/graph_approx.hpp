#pragma once

#include <string>
#include <vector>

#include "qlab/qfunc.hpp"

namespace qlab {

// Fiber point cloud over a base grid: per in-domain vertex, a list of
// points in the fiber R^n.
struct FiberCloud {
    GridDomain base;
    int n = 0;
    std::vector<std::vector<Vec>> fibers;  // indexed by vertex
};

struct GraphApproxResult {
    QGridFunction f;
    std::vector<std::size_t> kept_cells;     // positions in base.active_cells()
    std::vector<std::size_t> bad_vertices;
    double bad_fraction = 0.0;               // cells outside K / active cells
};

// Keeps the vertices whose fiber clusters (tolerance cluster_tol, counted
// with multiplicity) into exactly Q points; K = cells with all corners
// kept.  On K the induced graph current reproduces the samples by
// construction.  Vertices with too few or too many fiber points are
// excluded, never an abort.
GraphApproxResult graph_approximation(const FiberCloud& samples, int Q,
                                      double cluster_tol = 1e-9);

// CSV rows: vertex,fiber coordinates...
void save_fiber_csv(const FiberCloud& cloud, const std::string& path);
FiberCloud load_fiber_csv(GridDomain base, int n, const std::string& path);

}  // namespace qlab
