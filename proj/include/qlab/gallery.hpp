#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qlab/current.hpp"

namespace qlab {

// Analytic multi-sheeted example surface over the unit disk with exact
// evaluators, branch locus and anisotropic rescaling law.
struct AnalyticSurface {
    std::string name;
    int q = 2;
    int n = 2;
    // z = (x, y) -> multiset of q fiber points in R^n (branch points merge)
    std::function<std::vector<Vec>(double, double)> sheets;
    std::vector<Vec> branch_locus;
    std::optional<double> homogeneity;  // of the centered sheets
    // rescaling exponents per coordinate (base first, then fiber):
    // Phi_lambda scales coordinate k by lambda^exponent[k]
    std::vector<int> rescale_exponents;
    // defining polynomial residual |P(z,w)| for invariant checks
    std::function<double(double, double, const Vec&)> defining_residual;
};

// z^3 = w^2: sheets +-z^{3/2}, branch locus {0}, Phi_lambda(z,w) =
// (lambda^2 z, lambda^3 w), centered homogeneity 3/2.
AnalyticSurface surface_V();

// (w - z^2)^2 = z^5: sheets z^2 +- z^{5/2}, center surface w = z^2,
// inhomogeneous blowup (lambda z, lambda^2 w).
AnalyticSurface surface_W();

// centered W sheets +-z^{5/2}, homogeneity 5/2
AnalyticSurface surface_W_centered();

AnalyticSurface surface_by_name(const std::string& name);

struct SampledSurface {
    QGridFunction f;
    QGraphCurrent current;  // carries the sheet evaluator
    std::vector<std::size_t> branch_vertices;
};

// Evaluates the sheets at the grid vertices (domain must lie in the closed
// unit disk), builds optimal edge matchings and the graph current.
SampledSurface sample_on_grid(const AnalyticSurface& s, const GridDomain& domain);

}  // namespace qlab
