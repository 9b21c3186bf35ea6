#pragma once

#include <string>

#include "qlab/current.hpp"

namespace qlab {

struct RegionSpec {
    enum class Kind { Cylinder, Ball } kind = Kind::Cylinder;
    Vec center;  // base-plane point for cylinders, ambient point for balls
    double radius = 0.0;
};

struct ExcessReport {
    RegionSpec region;
    Plane plane;
    double excess = 0.0;               // tilt-integral form against `plane`
    double mass_deficit_excess = 0.0;  // mass/(omega_m r^m) - Q (plane-free)
    double height = 0.0;               // h(T, region, plane), sampled support
    double mass = 0.0;                 // ||T||(region)
};

// Cylindrical excess over C_r(x): both displayed forms; cells are clipped
// against the base disk in closed form so the two agree to quadrature
// roundoff when plane = pi_0.
ExcessReport cylindrical_excess(const QGraphCurrent& T, const Vec& x, double r,
                                const Plane& plane);

// Spherical excess in the ambient ball against a fixed plane.
ExcessReport spherical_excess_at_plane(const QGraphCurrent& T, const Vec& x, double r,
                                       const Plane& plane);

struct PlaneSearchConfig {
    double excess_tol = 1e-10;   // Nelder-Mead convergence on the objective
    double tie_window = 1e-9;    // near-optimal planes compete on height
    int max_iterations = 400;
    double max_tilt = 2.0;       // beyond: "tilt-too-large" search domain error
};

// Optimal plane: minimizes the excess over graph tilts (deterministic
// Nelder-Mead from the mass-weighted average tangent plane), then picks the
// height-minimizing plane among those within tie_window of the optimum.
// Throws contract_violation("empty-region") when the ball misses T.
ExcessReport spherical_excess(const QGraphCurrent& T, const Vec& x, double r,
                              const PlaneSearchConfig& cfg = {});

// height of T in the region with respect to a given plane (sup over sampled
// support point pairs of the plane-orthogonal spread; a lower bound of the
// true sup with O(h Lip) defect)
double height_in_ball(const QGraphCurrent& T, const Vec& x, double r, const Plane& plane);
double height_in_cylinder(const QGraphCurrent& T, const Vec& x, double r, const Plane& plane);

nlohmann::ordered_json excess_report_to_json(const ExcessReport& rep);
void save_excess_report(const ExcessReport& rep, const std::string& path);

}  // namespace qlab
