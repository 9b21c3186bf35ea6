#include "qlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace qlab {

WhitneyParams WhitneyParams::finalized(int m) const {
    WhitneyParams p = *this;
    if (p.beta2 == 0.0) p.beta2 = std::min(1.0 / (2.0 * m), p.gamma1 / 100.0);
    if (p.delta2 == 0.0) p.delta2 = p.beta2 / 4.0;
    return p;
}

void WhitneyParams::validate(int m) const {
    if (m < 1 || m > 3) throw contract_violation("WhitneyParams: m in {1,2,3}");
    if (C_e <= 0.0 || C_h <= 0.0 || gamma1 <= 0.0)
        throw contract_violation("WhitneyParams: C_e, C_h, gamma1 must be positive");
    if (beta2 <= 0.0 || delta2 <= 0.0)
        throw contract_violation("WhitneyParams: beta2, delta2 must be positive (finalize first)");
    if (std::abs(beta2 - 4.0 * delta2) > 1e-15 * beta2)
        throw contract_violation("WhitneyParams: beta2 = 4 delta2 violated");
    if (beta2 > 1.0 / (2.0 * m) + 1e-15 || beta2 > gamma1 / 100.0 + 1e-15)
        throw contract_violation("WhitneyParams: beta2 exceeds min(1/2m, gamma1/100)");
    if (M0 < 4) throw contract_violation("WhitneyParams: M0 >= 4 required");
    if (N0 < 0) throw contract_violation("WhitneyParams: N0 >= 0 required");
    if (excess_E < 0.0) throw contract_violation("WhitneyParams: excess E must be nonnegative");
    if (ball_factor <= 0.0) throw contract_violation("WhitneyParams: ball_factor must be positive");
}

bool WhitneyParams::paper_scale_ok(int m) const {
    return std::sqrt(static_cast<double>(m)) * M0 * std::pow(2.0, 7 - N0) <= 1.0 + 1e-12;
}

DyadicCube CubeTree::cube(const CubeKey& key) const {
    DyadicCube out;
    out.key = key;
    out.m = m_;
    out.half_side = std::pow(2.0, -key.level);
    out.center.resize(m_);
    const double side = 2.0 * out.half_side;
    for (int a = 0; a < m_; ++a) out.center[a] = -4.0 + (key.c[a] + 0.5) * side;
    out.r_L = params_.M0 * std::sqrt(static_cast<double>(m_)) * out.half_side;
    out.ball_radius = params_.ball_factor * out.r_L;
    return out;
}

std::optional<CubeClass> CubeTree::class_of(const CubeKey& key) const {
    const int idx = key.level - params_.N0;
    if (idx < 0 || idx >= static_cast<int>(levels_.size())) return std::nullopt;
    const auto it = levels_[idx].find(key);
    if (it == levels_[idx].end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<CubeKey, CubeClass>> CubeTree::level_cubes(int level) const {
    std::vector<std::pair<CubeKey, CubeClass>> out;
    const int idx = level - params_.N0;
    if (idx < 0 || idx >= static_cast<int>(levels_.size())) return out;
    out.assign(levels_[idx].begin(), levels_[idx].end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first.c < b.first.c; });
    return out;
}

const std::vector<CubeKey>& CubeTree::w_cubes(CubeClass cls) const {
    switch (cls) {
        case CubeClass::We: return we_;
        case CubeClass::Wh: return wh_;
        case CubeClass::Wn: return wn_;
        default: throw contract_violation("w_cubes: only We/Wh/Wn stored");
    }
}

bool CubeTree::is_w_cube(const CubeKey& key) const {
    const auto cls = class_of(key);
    return cls && (*cls == CubeClass::We || *cls == CubeClass::Wh || *cls == CubeClass::Wn);
}

std::vector<CubeKey> CubeTree::touching_at_level(const CubeKey& key, int level) const {
    // closed cubes touch iff their coordinate intervals overlap on each axis
    std::vector<CubeKey> out;
    const int idx = level - params_.N0;
    if (idx < 0 || idx >= static_cast<int>(levels_.size())) return out;
    const int j = key.level;
    std::array<std::pair<std::int64_t, std::int64_t>, 3> range{};
    for (int a = 0; a < m_; ++a) {
        std::int64_t lo, hi;  // candidate coords at `level`
        if (level >= j) {
            const std::int64_t f = std::int64_t{1} << (level - j);
            lo = static_cast<std::int64_t>(key.c[a]) * f - 1;
            hi = (static_cast<std::int64_t>(key.c[a]) + 1) * f;
        } else {
            const std::int64_t f = std::int64_t{1} << (j - level);
            // d touches iff d*f <= c+1 and (d+1)*f >= c
            lo = static_cast<std::int64_t>(std::floor(
                (static_cast<double>(key.c[a]) - f) / static_cast<double>(f)));
            while ((lo + 1) * f < key.c[a]) ++lo;
            hi = (static_cast<std::int64_t>(key.c[a]) + 1) / f;
            while (hi * f > key.c[a] + 1) --hi;
        }
        const std::int64_t n = cubes_per_axis(level);
        range[a] = {std::max<std::int64_t>(lo, 0), std::min<std::int64_t>(hi, n - 1)};
        if (range[a].first > range[a].second) return out;
    }
    std::array<std::int64_t, 3> c{0, 0, 0};
    std::function<void(int)> rec = [&](int axis) {
        if (axis == m_) {
            CubeKey k;
            k.level = level;
            for (int a = 0; a < m_; ++a) k.c[a] = static_cast<std::int32_t>(c[a]);
            if (k == key) return;
            if (levels_[idx].count(k)) out.push_back(k);
            return;
        }
        for (c[axis] = range[axis].first; c[axis] <= range[axis].second; ++c[axis]) rec(axis + 1);
    };
    rec(0);
    return out;
}

CubeTree build_decomposition(const CriterionOracle& oracle, const WhitneyParams& raw_params,
                             int m, int max_depth) {
    const WhitneyParams params = raw_params.finalized(m);
    params.validate(m);
    if (max_depth < params.N0)
        throw contract_violation("build_decomposition: max_depth must be >= N0");
    if (!oracle.excess_at || !oracle.height_at)
        throw contract_violation("build_decomposition: oracle incomplete");

    CubeTree tree(params, m, max_depth);
    tree.levels_.resize(max_depth - params.N0 + 1);

    const double ex_coef = params.C_e * params.excess_E;
    const double ht_coef = params.C_h * std::pow(params.excess_E, 1.0 / (2.0 * m));

    std::unordered_set<CubeKey, CubeKeyHash> prev_w;  // W^{j-1} for (NN)
    std::vector<CubeKey> frontier;                    // S^{j-1}

    for (int j = params.N0; j <= max_depth; ++j) {
        std::vector<CubeKey> candidates;
        if (j == params.N0) {
            const std::int64_t n = cubes_per_axis(j);
            std::array<std::int64_t, 3> c{0, 0, 0};
            std::function<void(int)> rec = [&](int axis) {
                if (axis == m) {
                    CubeKey k;
                    k.level = j;
                    for (int a = 0; a < m; ++a) k.c[a] = static_cast<std::int32_t>(c[a]);
                    candidates.push_back(k);
                    return;
                }
                for (c[axis] = 0; c[axis] < n; ++c[axis]) rec(axis + 1);
            };
            rec(0);
        } else {
            candidates.reserve(frontier.size() << m);
            for (const CubeKey& f : frontier) {
                for (int bits = 0; bits < (1 << m); ++bits) {
                    CubeKey son;
                    son.level = j;
                    for (int a = 0; a < m; ++a) son.c[a] = 2 * f.c[a] + ((bits >> a) & 1);
                    candidates.push_back(son);
                }
            }
        }

        auto& level_map = tree.levels_[j - params.N0];
        std::vector<CubeKey> next_frontier;
        std::unordered_set<CubeKey, CubeKeyHash> this_w;
        const double ell = std::pow(2.0, -j);
        const double ex_threshold = ex_coef * std::pow(ell, 2.0 - 2.0 * params.delta2);
        const double ht_threshold = ht_coef * std::pow(ell, 1.0 + params.beta2);

        std::vector<CubeClass> cls(candidates.size(), CubeClass::S);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const DyadicCube cube = tree.cube(candidates[i]);
            if (oracle.excess_at(cube) > ex_threshold) {
                cls[i] = CubeClass::We;
            } else if (oracle.height_at(cube) > ht_threshold) {
                cls[i] = CubeClass::Wh;
            } else {
                bool touches = false;
                if (!prev_w.empty()) {
                    for (const CubeKey& t : tree.touching_at_level(candidates[i], j - 1)) {
                        if (prev_w.count(t)) {
                            touches = true;
                            break;
                        }
                    }
                }
                cls[i] = touches ? CubeClass::Wn : CubeClass::S;
            }
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            level_map.emplace(candidates[i], cls[i]);
            switch (cls[i]) {
                case CubeClass::We:
                    tree.we_.push_back(candidates[i]);
                    tree.w_.push_back(candidates[i]);
                    this_w.insert(candidates[i]);
                    break;
                case CubeClass::Wh:
                    tree.wh_.push_back(candidates[i]);
                    tree.w_.push_back(candidates[i]);
                    this_w.insert(candidates[i]);
                    break;
                case CubeClass::Wn:
                    tree.wn_.push_back(candidates[i]);
                    tree.w_.push_back(candidates[i]);
                    this_w.insert(candidates[i]);
                    break;
                default:
                    next_frontier.push_back(candidates[i]);
                    break;
            }
        }
        prev_w = std::move(this_w);
        frontier = std::move(next_frontier);
    }
    // surviving S cubes approximate Gamma
    tree.unresolved_ = frontier;
    for (const CubeKey& k : frontier)
        tree.levels_[max_depth - params.N0][k] = CubeClass::Unresolved;
    std::sort(tree.unresolved_.begin(), tree.unresolved_.end(),
              [](const CubeKey& a, const CubeKey& b) { return a.c < b.c; });
    auto sorter = [](const CubeKey& a, const CubeKey& b) {
        return a.level != b.level ? a.level < b.level : a.c < b.c;
    };
    std::sort(tree.w_.begin(), tree.w_.end(), sorter);
    std::sort(tree.we_.begin(), tree.we_.end(), sorter);
    std::sort(tree.wh_.begin(), tree.wh_.end(), sorter);
    std::sort(tree.wn_.begin(), tree.wn_.end(), sorter);
    return tree;
}

namespace {

bool keys_touch(const CubeKey& a, const CubeKey& b) {
    const int fine = std::max(a.level, b.level);
    auto span = [&](const CubeKey& k, int axis) {
        const std::int64_t f = std::int64_t{1} << (fine - k.level);
        return std::pair<std::int64_t, std::int64_t>{
            static_cast<std::int64_t>(k.c[axis]) * f,
            (static_cast<std::int64_t>(k.c[axis]) + 1) * f};
    };
    for (int axis = 0; axis < 3; ++axis) {
        const auto [alo, ahi] = span(a, axis);
        const auto [blo, bhi] = span(b, axis);
        if (ahi < blo || bhi < alo) return false;
    }
    return true;
}

}  // namespace

DomainsOfInfluence domains_of_influence(const CubeTree& tree) {
    DomainsOfInfluence out;
    // the fixed ordering: decreasing side length, lexicographic on ties
    std::vector<CubeKey> roots = tree.w_cubes(CubeClass::We);
    std::sort(roots.begin(), roots.end(), [](const CubeKey& a, const CubeKey& b) {
        return a.level != b.level ? a.level < b.level : a.c < b.c;
    });
    std::unordered_set<CubeKey, CubeKeyHash> assigned;
    std::unordered_map<int, std::vector<CubeKey>> wn_by_level;
    for (const CubeKey& k : tree.w_cubes(CubeClass::Wn)) wn_by_level[k.level].push_back(k);

    const double sqrt_m = std::sqrt(static_cast<double>(tree.m()));
    for (const CubeKey& root : roots) {
        std::vector<CubeKey> family;
        std::vector<CubeKey> frontier{root};
        int level = root.level;
        while (!frontier.empty()) {
            ++level;
            auto it = wn_by_level.find(level);
            if (it == wn_by_level.end()) break;
            std::vector<CubeKey> next;
            for (const CubeKey& cand : it->second) {
                if (assigned.count(cand)) continue;
                for (const CubeKey& f : frontier) {
                    if (keys_touch(cand, f)) {
                        next.push_back(cand);
                        assigned.insert(cand);
                        break;
                    }
                }
            }
            for (const CubeKey& k : next) family.push_back(k);
            frontier = std::move(next);
        }
        // containment: H inside B_{3 sqrt(m) l(root)}(x_root)
        const DyadicCube rc = tree.cube(root);
        for (const CubeKey& h : family) {
            const DyadicCube hc = tree.cube(h);
            double far2 = 0.0;
            for (int a = 0; a < tree.m(); ++a) {
                const double lo = hc.center[a] - hc.half_side, hi = hc.center[a] + hc.half_side;
                const double d = std::max(std::abs(lo - rc.center[a]), std::abs(hi - rc.center[a]));
                far2 += d * d;
            }
            if (std::sqrt(far2) > 3.0 * sqrt_m * rc.half_side + 1e-12)
                out.containment_breaches.push_back(h);
        }
        out.families.emplace_back(root, std::move(family));
    }
    for (const CubeKey& k : tree.w_cubes(CubeClass::Wn))
        if (!assigned.count(k)) out.orphans.push_back(k);
    return out;
}

nlohmann::ordered_json CubeTree::to_json() const {
    nlohmann::ordered_json j;
    j["m"] = m_;
    j["max_depth"] = max_depth_;
    j["N0"] = params_.N0;
    j["M0"] = params_.M0;
    j["C_e"] = params_.C_e;
    j["C_h"] = params_.C_h;
    j["beta2"] = params_.beta2;
    j["delta2"] = params_.delta2;
    j["excess_E"] = params_.excess_E;
    j["ball_factor"] = params_.ball_factor;
    j["paper_scale"] = params_.paper_scale_ok(m_);
    nlohmann::ordered_json cubes = nlohmann::ordered_json::array();
    static const char* names[] = {"S", "We", "Wh", "Wn", "Gamma"};
    for (int level = params_.N0; level <= max_depth_; ++level) {
        for (const auto& [key, cls] : level_cubes(level)) {
            nlohmann::ordered_json c;
            c["level"] = key.level;
            nlohmann::ordered_json coords = nlohmann::ordered_json::array();
            for (int a = 0; a < m_; ++a) coords.push_back(key.c[a]);
            c["coords"] = coords;
            c["class"] = names[static_cast<int>(cls)];
            cubes.push_back(std::move(c));
        }
    }
    j["cubes"] = std::move(cubes);
    return j;
}

void save_cube_tree_json(const CubeTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << tree.to_json().dump(2) << "\n";
}

}  // namespace qlab
