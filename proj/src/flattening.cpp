#include "qlab/flattening.hpp"

#include <cmath>
#include <fstream>

namespace qlab {

namespace {

struct RSet {
    const std::function<double(double)>& profile;
    double eps2;
    bool contains(double r) const { return r > 0.0 && profile(r) <= eps2; }
};

// max of R ∩ (0, ub] located by a descending scan on the coarse grid plus
// upward bisection of the boundary
std::optional<double> max_below(const RSet& rset, double ub, const FlatteningConfig& cfg) {
    if (ub <= 0.0) return std::nullopt;
    double hit = -1.0, fail_above = -1.0;
    if (rset.contains(ub)) {
        hit = ub;
    } else {
        fail_above = ub;
        const std::int64_t k0 = static_cast<std::int64_t>(std::floor(ub / cfg.coarse_step));
        for (std::int64_t k = k0; k >= 1; --k) {
            const double r = k * cfg.coarse_step;
            if (r >= ub) continue;
            if (rset.contains(r)) {
                hit = r;
                break;
            }
            fail_above = r;
        }
    }
    if (hit < 0.0) return std::nullopt;
    if (fail_above < 0.0) return hit;  // ub itself is in R
    double lo = hit, hi = fail_above;
    while (hi - lo > cfg.tol) {
        const double mid = 0.5 * (lo + hi);
        if (rset.contains(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

FlatteningSchedule flattening_schedule(const std::function<double(double)>& excess_profile,
                                       const std::function<std::optional<double>(double)>& stop_oracle,
                                       const FlatteningConfig& cfg) {
    if (!(cfg.epsilon3 > 0.0)) throw contract_violation("flattening: epsilon3 must be positive");
    if (!excess_profile) throw contract_violation("flattening: missing excess profile");
    const RSet rset{excess_profile, cfg.epsilon3 * cfg.epsilon3};

    FlatteningSchedule out;
    out.epsilon3 = cfg.epsilon3;
    const auto t0 = max_below(rset, 1.0, cfg);
    if (!t0) throw contract_violation("never-flat");
    out.t0 = *t0;

    double t = *t0;
    for (int j = 0; j < cfg.max_intervals; ++j) {
        const auto rbar = stop_oracle ? stop_oracle(t) : std::nullopt;
        if (!rbar) {
            out.intervals.push_back({0.0, t, true});
            return out;
        }
        if (!(*rbar > 0.0) || *rbar > 3.0)
            throw contract_violation("flattening: stop radius outside ]0, 3]");
        if (cfg.current_backed && *rbar > std::pow(2.0, -5.0) + 1e-12)
            throw contract_violation("flattening: current-backed stop radius above 2^-5");
        const double s = *rbar * t;
        out.intervals.push_back({s, t, false});
        if (s < cfg.min_radius) {
            out.truncated = true;
            return out;
        }
        const auto next = max_below(rset, s, cfg);
        if (!next) return out;  // R exhausted below s: the closure is covered
        t = *next;
    }
    out.truncated = true;
    return out;
}

nlohmann::ordered_json schedule_to_json(const FlatteningSchedule& s) {
    nlohmann::ordered_json j;
    j["t0"] = s.t0;
    j["epsilon3"] = s.epsilon3;
    j["truncated"] = s.truncated;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& iv : s.intervals) {
        nlohmann::ordered_json e;
        e["s"] = iv.s;
        e["t"] = iv.t;
        e["kind"] = iv.go ? "Go" : "Stop";
        arr.push_back(std::move(e));
    }
    j["intervals"] = std::move(arr);
    return j;
}

void save_schedule_json(const FlatteningSchedule& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << schedule_to_json(s).dump(2) << "\n";
}

}  // namespace qlab
