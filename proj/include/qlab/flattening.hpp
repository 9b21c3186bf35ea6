#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/common.hpp"

namespace qlab {

struct FlatteningInterval {
    double s = 0.0;   // open lower end
    double t = 0.0;   // closed upper end
    bool go = false;  // final interval reaching 0
};

struct FlatteningSchedule {
    std::vector<FlatteningInterval> intervals;
    double t0 = 0.0;
    double epsilon3 = 0.0;
    bool truncated = false;  // stopped at min_radius or max_intervals
};

struct FlatteningConfig {
    double epsilon3 = 0.0;      // required positive
    double coarse_step = 1e-3;  // descending scan resolution for max R
    double tol = 1e-6;          // bisection tolerance
    double min_radius = 1e-6;
    int max_intervals = 64;
    bool current_backed = false;  // enforces the stop radius bound 2^{-5}
};

// Builds the intervals ]s_j, t_j] from the excess profile r -> E(B_{6 sqrt(m) r})
// and the stop oracle t_j -> max Stop radius (nullopt = Go).  R = {r in (0,1]:
// profile(r) <= epsilon3^2} is queried only through membership; its maxima
// are located by a descending coarse scan plus bisection to `tol` (isolated
// points finer than coarse_step can be missed; the scan grid is the stated
// resolution).  Throws contract_violation("never-flat") when R is empty at
// scan resolution.
FlatteningSchedule flattening_schedule(const std::function<double(double)>& excess_profile,
                                       const std::function<std::optional<double>(double)>& stop_oracle,
                                       const FlatteningConfig& cfg);

nlohmann::ordered_json schedule_to_json(const FlatteningSchedule& s);
void save_schedule_json(const FlatteningSchedule& s, const std::string& path);

}  // namespace qlab
