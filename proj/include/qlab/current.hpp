#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qlab/forms.hpp"
#include "qlab/qfunc.hpp"

namespace qlab {

// Integer rectifiable current induced by a Lipschitz Q-graph over a planar
// base: matched, consistently oriented lifted triangles with multiplicity
// +1 per sheet.  Each base square splits along the (00,11) diagonal; sheet
// labels per cell minimize the total vertex-matching cost over the cell's
// five edges (lexicographic tie-break).
class QGraphCurrent {
  public:
    QGraphCurrent() = default;

    const QGridFunction& function() const { return f_; }
    const GridDomain& base() const { return f_.domain(); }
    int q() const { return f_.q(); }
    int n() const { return f_.n(); }
    int ambient_dim() const { return 2 + f_.n(); }

    // labels()[cell][corner] maps cell sheet s to the storage slot at that
    // corner; corner order 00,10,01,11
    const std::vector<std::array<std::vector<int>, 4>>& labels() const { return labels_; }

    // exact fiber evaluator for resampling (set by the gallery when the
    // current comes from an analytic surface)
    std::function<std::vector<Vec>(double, double)> sheet_evaluator;

    // lifted vertex of cell sheet s at the given corner (ambient point)
    Vec lifted_point(std::size_t cell_pos, int corner, int sheet) const;

    // enumerate simplices: fn(cell position in the active list, sheet,
    // triangle id 0/1, A, B, C ambient points)
    void for_each_simplex(
        const std::function<void(std::size_t, int, int, const Vec&, const Vec&, const Vec&)>& fn)
        const;

    friend QGraphCurrent make_graph_current(QGridFunction f);

  private:
    QGridFunction f_;
    std::vector<std::array<std::vector<int>, 4>> labels_;  // per active cell
};

QGraphCurrent make_graph_current(QGridFunction f);

// T(omega) = sum over simplices of <omega(centroid), tau> * area
double pair_with_form(const QGraphCurrent& T, const TwoForm& omega);

// pairing of the boundary graph current (lifted boundary segments of the
// triangulated base, counterclockwise) with a 1-form, midpoint rule
double boundary_pairing(const QGraphCurrent& T, const OneForm& omega);

// T(d omega) - (boundary current)(omega); a pure quadrature residual for a
// consistent discretization
double boundary_defect(const QGraphCurrent& T, const OneForm& omega);

// total mass = sum of simplex areas
double graph_mass_exact(const QGraphCurrent& T);

struct MassTaylor {
    double main = 0.0;      // Q |Omega| + 1/2 Dir(f)
    double residual = 0.0;  // graph_mass_exact - main
    double lipschitz = 0.0;
    bool lip_warning = false;  // Lipschitz estimate above the bound
};

// First-order mass expansion; the Dirichlet term uses the current's own
// cell labelling so the identity with the simplexwise area is exact.
MassTaylor graph_mass_taylor(const QGraphCurrent& T, double lip_bound = 0.5);

// max over cell edges of the labelled sheet difference / edge length
double lipschitz_estimate(const QGraphCurrent& T);

// Dirichlet energy evaluated with the current's cell labelling, optionally
// restricted by per-active-cell multipliers.
double cell_labelled_energy(const QGraphCurrent& T, const std::vector<double>* cell_multiplier);

}  // namespace qlab
