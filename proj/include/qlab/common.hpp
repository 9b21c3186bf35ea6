#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlab {

// Contract violations (bad arguments, mismatched shapes) are programming or
// configuration errors and throw; recoverable numerical conditions are
// reported through result types instead.
struct contract_violation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct degenerate_denominator : std::domain_error {
    using std::domain_error::domain_error;
};

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Volume of the unit m-ball.
inline double unit_ball_volume(int m) {
    switch (m) {
        case 0: return 1.0;
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi / 3.0;
        default:
            return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
    }
}

// Deterministic, platform-independent RNG (splitmix64 core). std::mt19937
// would be fine for the engine but the distributions are not portable, so we
// roll the few draws we need by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [0,n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(next_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p[i], p[j]);
        }
        return p;
    }

  private:
    std::uint64_t state_;
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Deterministic helper for embarrassingly parallel loops: results are
// written to disjoint slots so the outcome does not depend on the thread
// count.  0 threads = the QLAB_THREADS environment default (or 1).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int threads = 0);
int default_thread_count();
void set_default_thread_count(int threads);

}  // namespace qlab
