#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qlab/qfunc.hpp"

namespace qlab {

// Piecewise linear cutoff: 1 on [0,1/2], 2-2t on (1/2,1], 0 beyond.
struct CutoffPhi {
    static double value(double t) {
        if (t <= 0.5) return 1.0;
        if (t <= 1.0) return 2.0 - 2.0 * t;
        return 0.0;
    }
    static double derivative(double t) { return (t > 0.5 && t < 1.0) ? -2.0 : 0.0; }
};

enum class FrequencyVariant { Classical, Smoothed };

struct FrequencyEntry {
    double r = 0.0;
    double D = 0.0;
    double H = 0.0;
    std::optional<double> I;  // r*D/H where H is above the denominator floor
};

struct FrequencyProfile {
    Vec center;
    FrequencyVariant variant = FrequencyVariant::Smoothed;
    std::vector<FrequencyEntry> entries;
    // I at the smallest radius with a defined denominator
    std::optional<double> vanishing_order() const {
        for (const auto& e : entries)
            if (e.I) return e.I;
        return std::nullopt;
    }
};

// denominators below this are treated as degenerate
inline constexpr double kDenominatorFloor = 1e-14;

// r * int_{B_r} |Df|^2 / int_{boundary B_r} |f|^2 with cellwise bulk
// quadrature (exact disk-overlap cell weights) and the ring integral by
// bilinear interpolation on max(64, ceil(2 pi r / h)) angular nodes.
// Throws degenerate_denominator when the ring integral vanishes.
double classical_frequency(const QGridFunction& f, const Vec& center, double r);

struct SmoothedDHI {
    double D = 0.0;
    double H = 0.0;
    std::optional<double> I;
};

// D = int phi(|x-c|/r) |Df|^2,  H = -int phi'(|x-c|/r) |f|^2 / |x-c|,
// I = r D / H when H is non-degenerate.
SmoothedDHI smoothed_dhi(const QGridFunction& f, const Vec& center, double r);

// Same H through the coarea route 2 int_{r/2}^r t^{-1} int_{boundary B_t}
// |f|^2 dt (ring quadrature + composite Simpson); cross-checks smoothed_dhi.
double smoothed_height_coarea(const QGridFunction& f, const Vec& center, double r,
                              int t_nodes = 128);

// Optional Richardson extrapolation in the grid spacing: takes the same
// data sampled at h and h/2 and cancels the second-order quadrature term.
double richardson_classical_frequency(const QGridFunction& coarse, const QGridFunction& fine,
                                      const Vec& center, double r);

FrequencyProfile frequency_profile(const QGridFunction& f, const Vec& center, double r_min,
                                   double r_max, int steps, FrequencyVariant variant);

struct MonotonicityReport {
    double almost_monotonicity_constant = 0.0;  // max over a<b of I(a)/(1+I(b))
    double largest_violation = 0.0;             // max over a<b of I(a)-I(b), clamped at 0
    bool pass = false;
    int defined_entries = 0;
};

// Throws contract_violation("insufficient-data") with fewer than 2 defined
// entries.
MonotonicityReport monotonicity_report(const FrequencyProfile& p, double tolerance);

void save_profile_csv(const FrequencyProfile& p, const std::string& path);

// ring integral of sum_i |f_i|^2 over the circle of radius r (bilinear
// interpolation of the vertexwise squared norm); exposed for the coarea
// cross-check and tests
double ring_integral_norm2(const QGridFunction& f, const Vec& center, double r);

}  // namespace qlab
