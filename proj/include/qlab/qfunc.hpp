#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlab/aq.hpp"
#include "qlab/grid.hpp"

namespace qlab {

// Q-valued samples on a grid domain plus per-edge matchings.  Matchings are
// either recomputed as optimal pairings of the endpoint values or frozen to
// solver-chosen permutations.
class QGridFunction {
  public:
    QGridFunction() = default;
    QGridFunction(GridDomain domain, int q, int n);

    const GridDomain& domain() const { return domain_; }
    int q() const { return q_; }
    int n() const { return n_; }

    const QPoint& value(std::size_t v) const { return values_[v]; }
    QPoint& value(std::size_t v) { return values_[v]; }

    bool frozen() const { return frozen_; }
    // Replace all matchings by per-edge optimal ones.
    void rematch_all();
    // Freeze the current matchings (solver labellings survive energy calls).
    void freeze() { frozen_ = true; }

    const Matching& edge_matching(std::size_t edge_index) const { return matchings_[edge_index]; }
    Matching& edge_matching(std::size_t edge_index) { return matchings_[edge_index]; }

    // sum over sheets of |f_i(v)|^2; permutation invariant
    double value_norm2(std::size_t v) const;

  private:
    GridDomain domain_;
    int q_ = 0, n_ = 0;
    std::vector<QPoint> values_;
    std::vector<Matching> matchings_;  // parallel to domain().edges()
    bool frozen_ = false;
};

// Per-boundary-vertex QPoint covering exactly the domain's boundary set.
struct TraceData {
    std::unordered_map<std::size_t, QPoint> values;

    void validate(const GridDomain& domain, int q, int n) const;
};

// Discrete Dirichlet energy: sum over edges of w_e * (matching cost)/h^2.
// For Q = 1 this is the classical 5-point discrete Dirichlet integral; it is
// exact on superpositions of linear sheets.
double dirichlet_energy(const QGridFunction& f);

// Same quadrature restricted to cells with a positive multiplier, used by
// the frequency and excess integrals.  multiplier(cell) in [0,1].
double dirichlet_energy_weighted(const QGridFunction& f,
                                 const std::vector<double>& cell_multiplier);

struct SheetSelection {
    // selections[i][v] = value of sheet i at vertex v (n doubles); only
    // meaningful on in-domain vertices
    std::vector<std::vector<Vec>> selections;
    // active plaquettes with non-identity boundary holonomy, plus the cells
    // of any enclosed hole whose surrounding loop carries monodromy
    std::vector<std::size_t> branch_cells;
    bool selection_exists = false;  // true iff branch_cells is empty
};

// Propagates sheet labels along a BFS spanning tree of the grid graph and
// reports plaquette holonomies.  m = 2 only.
SheetSelection select_sheets(const QGridFunction& f);

// max over vertex pairs of g_dist(f(x), f(y)) / |x-y|^kappa; all pairs for
// <= 10^4 in-domain vertices, a deterministic subsample beyond.
double holder_seminorm(const QGridFunction& f, double kappa);

// Composition of edge matchings along a closed vertex loop (consecutive
// vertices must be grid neighbors).  Returns the holonomy permutation.
std::vector<int> loop_holonomy(const QGridFunction& f, const std::vector<std::size_t>& loop);

// ---- serialization ----------------------------------------------------

// JSON header (domain, h, q, n) + CSV vertex table.
void save_qgrid_function(const QGridFunction& f, const std::string& header_path,
                         const std::string& table_path);
QGridFunction load_qgrid_function(const std::string& header_path, const std::string& table_path);

void save_trace(const TraceData& trace, const GridDomain& domain, int q, int n,
                const std::string& header_path, const std::string& table_path);
TraceData load_trace(const GridDomain& domain, int q, int n, const std::string& table_path);

nlohmann::ordered_json domain_to_json(const GridDomain& d);
GridDomain domain_from_json(const nlohmann::json& j);

}  // namespace qlab
