#pragma once

#include <cstdint>
#include <vector>

#include "qlab/qfunc.hpp"

namespace qlab {

struct SolverConfig {
    int max_outer_iters = 200;
    int inner_sweeps = 4000;
    int restarts = 0;  // runs = restarts + 1; run 0 uses the unpermuted init
    double energy_tol = 1e-10;
    std::uint64_t rng_seed = 1;
    // temperature per outer iteration for occasionally accepting
    // cost-increasing local re-matchings; empty = pure descent
    std::vector<double> reassignment_temperature_schedule;
    double over_relaxation = 0.0;  // 0 = auto from grid spacing
    // initialization: relaxation sweeps with the matchings re-optimized
    // after every sweep, so the matching field tracks the values while the
    // boundary data diffuses inward; counts as part of the initial guess
    int init_coupled_sweeps = 128;
    // branch-defect polish: propose transposition flips on the edges of
    // branched plaquettes (each flip moves the defect to a neighboring
    // cell), relax, and keep strict energy descents.  0 disables.
    int defect_polish_moves = 128;
    int polish_sweeps = 300;

    void validate() const {
        if (energy_tol <= 0.0) throw contract_violation("SolverConfig: energy_tol must be > 0");
        if (max_outer_iters <= 0 || inner_sweeps <= 0 || restarts < 0)
            throw contract_violation("SolverConfig: bad iteration counts");
    }
};

struct DirMinResult {
    QGridFunction f;          // frozen matchings (the solver's labelling)
    bool converged = false;
    double energy = 0.0;
    double residual = 0.0;    // max relaxation residual at the last sweep
    int outer_iters = 0;
    int best_restart = 0;
    // energy after each outer iteration of the winning restart; with an
    // all-zero temperature schedule this sequence is nonincreasing
    std::vector<double> energy_history;
    // trajectories of every restart run, for logs
    std::vector<std::vector<double>> all_histories;
};

// Alternating minimization for the fixed-trace Dirichlet problem: relax the
// relabelled sheets with frozen matchings (red-black Gauss-Seidel, optional
// over-relaxation), re-optimize matchings, repeat until the energy decrease
// drops below energy_tol.  Deterministic given cfg.rng_seed; the trace is
// canonicalized on entry so the result does not depend on its internal
// point order.
DirMinResult dir_minimize(const TraceData& trace, const GridDomain& domain,
                          const SolverConfig& cfg);

}  // namespace qlab
