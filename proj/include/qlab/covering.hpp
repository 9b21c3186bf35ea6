#pragma once

#include "qlab/whitney.hpp"

namespace qlab {

inline double flattening_c_s(int m) { return 1.0 / (64.0 * std::sqrt(static_cast<double>(m))); }

struct CoveringPair {
    CubeKey cube;            // L in W_e or W_h
    Vec selection_center;    // x_L
    double selection_radius; // s(L) of the greedy ball B^L
    Vec ball_center;         // q_L of B(L)
    double ball_radius;      // l(L)/4
    std::vector<CubeKey> family;  // W(L)
};

struct CoveringResult {
    std::vector<CoveringPair> pairs;
    std::vector<CubeKey> containment_breaches;  // family member outside B_{30 sqrt(m) l}(x_L)
    std::vector<CubeKey> unassigned;            // W cubes meeting B with no pair
};

// Cube-ball covering of the W cubes meeting the disk B = B_radius(B_center):
// greedy radius-bucketed maximal disjoint ball selection; every pair ball
// has radius l(L)/4, lies in B at distance >= l(L)/4 from its boundary, and
// every W cube meeting B lands in exactly one family W(L) inside
// B_{30 sqrt(m) l(L)}(x_L).  Candidate cubes must satisfy the flattening-
// regime bound l(L) <= 3 c_s r.
CoveringResult covering_pairs(const CubeTree& tree, const DomainsOfInfluence& doi,
                              const Vec& B_center, double B_radius, double r);

}  // namespace qlab
