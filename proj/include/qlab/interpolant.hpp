#pragma once

#include "qlab/current.hpp"
#include "qlab/whitney.hpp"

namespace qlab {

// Radial mollifier a (1-t^2)^3 + b (1-t^2)^5 with unit integral and
// vanishing second moment on R^2; (a, b) from a 2x2 moment solve.
struct Mollifier {
    double a = 0.0, b = 0.0, radius = 1.0;

    static Mollifier with_radius(double radius);
    double operator()(double dist) const {
        const double t = dist / radius;
        if (t >= 1.0) return 0.0;
        const double s = 1.0 - t * t;
        const double s3 = s * s * s;
        return a * s3 + b * s3 * s * s;
    }
};

// Per-axis quintic-smoothstep bump: identically 1 on [-1,1]^m, supported in
// [-17/16, 17/16]^m, C^2 smooth.
double bump_theta(std::span<const double> t);

struct InterpolantConfig {
    double region_scale = 1.0;      // scales the 8/7/4 r_L working regions
    double grid_factor = 0.25;      // local grid spacing = grid_factor * l(L)
    double max_tilt = 0.5;          // beyond: "tilt-too-large"
    int newton_iterations = 8;
    bool optimize_plane = true;     // refine the linearized plane by descent
};

// Sampled interpolating map g_L on the pi_0 grid around x_L, with bilinear
// evaluation.
struct Interpolant {
    CubeKey cube;
    Vec center;       // x_L
    double spacing = 0.0;
    int half_cells = 0;  // samples span center +- half_cells * spacing
    int n = 0;
    std::vector<Vec> values;  // (2*half_cells+1)^2 fiber vectors, row-major
    Plane plane;              // the pi_L used

    Vec eval(double x, double y) const;
};

// Lipschitz-approximation -> mollified average -> reparametrization over
// pi_0 for one cube: g_L on B_{4 r_L}(x_L) (scaled by cfg.region_scale).
Interpolant interpolant_pipeline(const QGraphCurrent& current, const DyadicCube& cube,
                                 const InterpolantConfig& cfg = {});

struct PatchResult {
    Vec origin;        // lower-left corner of the sample grid
    double h = 0.0;    // sample spacing
    int nx = 0, ny = 0;
    int n = 0;                  // fiber dimension
    std::vector<Vec> values;    // nx*ny samples of phi_j
    double min_denominator = 0.0;  // min over samples of sum theta_L
    double c0_norm = 0.0;
    double lip_norm = 0.0;
};

// phi_j = sum theta_L g_L / sum theta_L over P^j = S^j U {L in W : l(L) >=
// 2^{-j}}, sampled on a uniform grid over [-4,4]^2.  The provider returns
// the evaluator for each cube; missing cubes are a contract violation.
PatchResult patch_interpolants(
    const CubeTree& tree, int j,
    const std::function<std::function<Vec(double, double)>(const CubeKey&)>& g_provider,
    double sample_h, int n_out);

}  // namespace qlab
