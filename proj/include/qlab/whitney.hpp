#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "qlab/common.hpp"

namespace qlab {

// Construction constants of the dyadic decomposition of [-4,4]^m.
struct WhitneyParams {
    double C_e = 1.0;
    double C_h = 1.0;
    double gamma1 = 0.01;  // stand-in for the approximation exponent
    double beta2 = 0.0;    // 0: derived as min(1/(2m), gamma1/100)
    double delta2 = 0.0;   // 0: derived as beta2/4
    int N0 = 7;
    int M0 = 4;
    double excess_E = 1.0;      // global excess E entering the thresholds
    double ball_factor = 64.0;  // B_L radius = ball_factor * r_L (64 in scale)

    // fills the derived fields for dimension m
    WhitneyParams finalized(int m) const;
    // throws contract_violation on invariant violations
    void validate(int m) const;
    // the cube-ball nesting constraint sqrt(m) M0 2^{7-N0} <= 1; desk-scale
    // trees run below it, so it is reported rather than enforced
    bool paper_scale_ok(int m) const;
};

enum class CubeClass : std::uint8_t { S = 0, We = 1, Wh = 2, Wn = 3, Unresolved = 4 };

// Dyadic cube of [-4,4]^m at level j: side 2^{1-j} (= 2 l(L)), lattice
// coords in [0, 2^{j+2})^m.
struct CubeKey {
    int level = 0;
    std::array<std::int32_t, 3> c = {0, 0, 0};

    bool operator==(const CubeKey& o) const { return level == o.level && c == o.c; }
};

struct CubeKeyHash {
    std::size_t operator()(const CubeKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.level + 8) * 0x9e3779b97f4a7c15ULL;
        for (int a = 0; a < 3; ++a) h = (h ^ static_cast<std::uint64_t>(k.c[a] + 1)) * 0xff51afd7ed558ccdULL;
        return static_cast<std::size_t>(h ^ (h >> 32));
    }
};

// Geometric view of a cube handed to criterion oracles.
struct DyadicCube {
    CubeKey key;
    int m = 2;
    double half_side = 0.0;   // l(L) = 2^{-level}
    Vec center;               // x_L
    double r_L = 0.0;         // M0 sqrt(m) l(L)
    double ball_radius = 0.0; // ball_factor * r_L
};

inline int cubes_per_axis(int level) { return 1 << (level + 2); }

// Criteria provider: excess and height over the cube's ball, backed by a
// graph current or by a synthetic test function.
struct CriterionOracle {
    std::function<double(const DyadicCube&)> excess_at;
    std::function<double(const DyadicCube&)> height_at;
};

class CubeTree {
  public:
    CubeTree(WhitneyParams params, int m, int max_depth)
        : params_(std::move(params)), m_(m), max_depth_(max_depth) {}

    int m() const { return m_; }
    int max_depth() const { return max_depth_; }
    const WhitneyParams& params() const { return params_; }

    DyadicCube cube(const CubeKey& key) const;
    std::optional<CubeClass> class_of(const CubeKey& key) const;
    // all cubes the construction classified at a level (empty above depth)
    std::vector<std::pair<CubeKey, CubeClass>> level_cubes(int level) const;

    const std::vector<CubeKey>& w_cubes() const { return w_; }
    const std::vector<CubeKey>& w_cubes(CubeClass cls) const;
    // surviving S-chains at max_depth: the cell-resolution approximation of
    // the contact set Gamma
    const std::vector<CubeKey>& gamma_cells() const { return unresolved_; }

    // cubes at `level` whose closed cube touches the closed cube of `key`
    std::vector<CubeKey> touching_at_level(const CubeKey& key, int level) const;
    bool is_w_cube(const CubeKey& key) const;

    nlohmann::ordered_json to_json() const;

    friend CubeTree build_decomposition(const CriterionOracle& oracle,
                                        const WhitneyParams& params, int m, int max_depth);

  private:
    WhitneyParams params_;
    int m_;
    int max_depth_;
    std::vector<std::unordered_map<CubeKey, CubeClass, CubeKeyHash>> levels_;  // [level - N0]
    std::vector<CubeKey> w_, we_, wh_, wn_, unresolved_;
};

// Breadth-first refinement of [-4,4]^m from level N0: a cube whose father
// stayed in S is classified by (EX) excess > C_e E l^{2-2 delta2}, then
// (HT) height > C_h E^{1/2m} l^{1+beta2}, then (NN) touching a previous-
// level W cube, else S.  Cubes still in S at max_depth are flagged
// unresolved; they approximate Gamma.
CubeTree build_decomposition(const CriterionOracle& oracle, const WhitneyParams& params, int m,
                             int max_depth);

struct DomainsOfInfluence {
    // W_e roots in the fixed decreasing-side order with their W_n families
    std::vector<std::pair<CubeKey, std::vector<CubeKey>>> families;
    std::vector<CubeKey> orphans;              // W_n cubes with no chain (structural error)
    std::vector<CubeKey> containment_breaches; // family members outside B_{3 sqrt(m) l}(x_root)
};

// Partitions W_n along touching chains of halving side length rooted in
// W_e cubes (first root in the fixed ordering wins).
DomainsOfInfluence domains_of_influence(const CubeTree& tree);

void save_cube_tree_json(const CubeTree& tree, const std::string& path);

}  // namespace qlab
