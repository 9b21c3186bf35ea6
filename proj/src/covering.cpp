#include "qlab/covering.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

namespace {

double dist_point_cube(const Vec& p, const DyadicCube& cube) {
    double d2 = 0.0;
    for (int a = 0; a < cube.m; ++a) {
        const double lo = cube.center[a] - cube.half_side, hi = cube.center[a] + cube.half_side;
        const double d = std::max({lo - p[a], p[a] - hi, 0.0});
        d2 += d * d;
    }
    return std::sqrt(d2);
}

bool cube_meets_disk(const DyadicCube& cube, const Vec& c, double r) {
    return dist_point_cube(c, cube) <= r;
}

}  // namespace

CoveringResult covering_pairs(const CubeTree& tree, const DomainsOfInfluence& doi,
                              const Vec& B_center, double B_radius, double r) {
    if (static_cast<int>(B_center.size()) != tree.m())
        throw contract_violation("covering_pairs: center dimension mismatch");
    const double c_s = flattening_c_s(tree.m());
    const double sqrt_m = std::sqrt(static_cast<double>(tree.m()));

    // domain-of-influence root lookup for W_n cubes
    std::unordered_map<CubeKey, CubeKey, CubeKeyHash> root_of;
    for (const auto& [root, family] : doi.families)
        for (const CubeKey& h : family) root_of.emplace(h, root);

    // the candidate family T: W_e/W_h cubes meeting B plus roots of W_n
    // cubes meeting B
    std::vector<CubeKey> t_cubes;
    std::unordered_set<CubeKey, CubeKeyHash> t_set;
    auto add_candidate = [&](const CubeKey& k) {
        if (t_set.insert(k).second) t_cubes.push_back(k);
    };
    for (CubeClass cls : {CubeClass::We, CubeClass::Wh})
        for (const CubeKey& k : tree.w_cubes(cls))
            if (cube_meets_disk(tree.cube(k), B_center, B_radius)) add_candidate(k);
    for (const CubeKey& k : tree.w_cubes(CubeClass::Wn)) {
        if (!cube_meets_disk(tree.cube(k), B_center, B_radius)) continue;
        const auto it = root_of.find(k);
        if (it != root_of.end()) add_candidate(it->second);
    }

    // flattening-regime precondition on every candidate
    for (const CubeKey& k : t_cubes) {
        if (tree.cube(k).half_side > 3.0 * c_s * r + 1e-15)
            throw contract_violation("covering_pairs: cube outside the flattening regime");
    }

    struct Entry {
        CubeKey key;
        Vec center;
        double ell;
        double s;  // greedy ball radius
    };
    std::vector<Entry> entries;
    for (const CubeKey& k : t_cubes) {
        const DyadicCube cube = tree.cube(k);
        Entry e;
        e.key = k;
        e.center = cube.center;
        e.ell = cube.half_side;
        const double d = std::sqrt(dist2(cube.center, B_center));
        e.s = d <= B_radius ? cube.half_side : (d - B_radius) + cube.half_side;
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.key.level != b.key.level) return a.key.level < b.key.level;
        return a.key.c < b.key.c;
    });

    CoveringResult out;
    if (entries.empty()) return out;

    // greedy bucketed maximal disjoint selection: radii in ]2^-k S, 2^{1-k} S]
    const double S = entries.front().s;
    std::vector<const Entry*> selected;
    std::vector<char> taken(entries.size(), 0);
    for (int bucket = 1; bucket <= 64; ++bucket) {
        const double lo = std::pow(2.0, -bucket) * S;
        bool any_below = false;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (taken[i]) continue;
            if (entries[i].s <= lo) {
                any_below = true;
                continue;
            }
            bool disjoint = true;
            for (const Entry* sel : selected) {
                if (std::sqrt(dist2(entries[i].center, sel->center)) <
                    entries[i].s + sel->s - 1e-15) {
                    disjoint = false;
                    break;
                }
            }
            if (disjoint) {
                selected.push_back(&entries[i]);
                taken[i] = 1;
            } else {
                taken[i] = 1;  // dominated: a larger selected ball meets it
            }
        }
        if (!any_below) break;
    }

    // pair balls B(L) of radius l/4 inside B at distance >= l/4 from its
    // boundary
    std::unordered_map<CubeKey, std::size_t, CubeKeyHash> pair_of;
    for (const Entry* sel : selected) {
        CoveringPair pair;
        pair.cube = sel->key;
        pair.selection_center = sel->center;
        pair.selection_radius = sel->s;
        const double d = std::sqrt(dist2(sel->center, B_center));
        Vec q = sel->center;
        const double reach = B_radius - 0.5 * sel->ell;
        if (d > reach && d > 0.0) {
            for (int a = 0; a < tree.m(); ++a)
                q[a] = B_center[a] + (sel->center[a] - B_center[a]) * reach / d;
        }
        pair.ball_center = std::move(q);
        pair.ball_radius = 0.25 * sel->ell;
        pair_of.emplace(sel->key, out.pairs.size());
        out.pairs.push_back(std::move(pair));
    }

    // assign every W cube meeting B to exactly one family
    auto entry_of = [&](const CubeKey& k) -> const Entry* {
        for (const Entry& e : entries)
            if (e.key == k) return &e;
        return nullptr;
    };
    for (CubeClass cls : {CubeClass::We, CubeClass::Wh, CubeClass::Wn}) {
        for (const CubeKey& h : tree.w_cubes(cls)) {
            if (!cube_meets_disk(tree.cube(h), B_center, B_radius)) continue;
            CubeKey j = h;
            if (!t_set.count(j)) {
                const auto it = root_of.find(h);
                if (it == root_of.end()) {
                    out.unassigned.push_back(h);
                    continue;
                }
                j = it->second;
            }
            const Entry* je = entry_of(j);
            std::size_t target = SIZE_MAX;
            if (pair_of.count(j)) {
                target = pair_of[j];
            } else {
                // maximality: some selected ball meets B^J with s(L) >= s(J)/2
                for (const Entry* sel : selected) {
                    if (sel->s + 1e-15 >= 0.5 * je->s &&
                        std::sqrt(dist2(je->center, sel->center)) < je->s + sel->s + 1e-12) {
                        target = pair_of[sel->key];
                        break;
                    }
                }
            }
            if (target == SIZE_MAX) {
                out.unassigned.push_back(h);
                continue;
            }
            out.pairs[target].family.push_back(h);
            // containment check against 30 sqrt(m) l(L)
            const DyadicCube hc = tree.cube(h);
            const DyadicCube lc = tree.cube(out.pairs[target].cube);
            double far2 = 0.0;
            for (int a = 0; a < tree.m(); ++a) {
                const double lo = hc.center[a] - hc.half_side, hi = hc.center[a] + hc.half_side;
                const double dd = std::max(std::abs(lo - lc.center[a]), std::abs(hi - lc.center[a]));
                far2 += dd * dd;
            }
            if (std::sqrt(far2) > 30.0 * sqrt_m * lc.half_side + 1e-12)
                out.containment_breaches.push_back(h);
        }
    }
    return out;
}

}  // namespace qlab
