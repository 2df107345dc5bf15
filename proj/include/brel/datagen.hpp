#pragma once

// Synthetic relation generators. Every pair is stored as drawn; nothing is
// symmetrized. Generation is a pure function of the GenSpec.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "brel/error.hpp"
#include "brel/random.hpp"
#include "brel/relation.hpp"

namespace brel {

enum class Model { random, smallworld, barabasi, clustered };

inline std::string_view to_string(Model m) {
    switch (m) {
    case Model::random: return "random";
    case Model::smallworld: return "smallworld";
    case Model::barabasi: return "barabasi";
    case Model::clustered: return "clustered";
    }
    return "?";
}

inline Model parse_model(std::string_view s) {
    for (auto m : {Model::random, Model::smallworld, Model::barabasi, Model::clustered})
        if (to_string(m) == s)
            return m;
    throw ArgumentError("unknown model '" + std::string(s) + "'");
}

struct GenSpec {
    Model model = Model::random;
    NodeId n = 0;
    std::uint64_t m = 0;
    std::uint64_t k = 2;     // smallworld ring neighbours, barabasi links per node
    std::uint64_t seed = 1;
    // clustered model
    std::uint64_t clusters = 16;
    std::uint64_t cluster_side = 0; // 0: smallest side that holds the pairs
    double cluster_density = 0.25;
};

// Square cluster [row, row + side) x [col, col + side).
struct Cluster {
    NodeId row, col, side;

    bool contains(Pair p) const noexcept {
        return p.x >= row && p.x - row < side && p.y >= col && p.y - col < side;
    }
};

namespace detail {

inline std::uint64_t pair_key(NodeId x, NodeId y) noexcept { return (std::uint64_t{x} << 32) | y; }
inline Pair key_pair(std::uint64_t key) noexcept {
    return {static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu)};
}

class PairSet {
public:
    bool insert(NodeId x, NodeId y) {
        if (!keys_.insert(pair_key(x, y)).second)
            return false;
        order_.push_back({x, y});
        return true;
    }
    bool contains(NodeId x, NodeId y) const { return keys_.count(pair_key(x, y)) != 0; }
    std::uint64_t size() const noexcept { return order_.size(); }
    std::vector<Pair>& pairs() noexcept { return order_; }

private:
    std::unordered_set<std::uint64_t> keys_;
    std::vector<Pair> order_; // insertion order keeps draws reproducible
};

// Adds uniform pairs until the set holds m.
inline void fill_uniform(PairSet& set, NodeId n, std::uint64_t m, Rng& rng) {
    while (set.size() < m)
        set.insert(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
}

// Keeps a uniform sample of m pairs.
inline PlainRelation finish(NodeId n, std::vector<Pair> pairs, std::uint64_t m, Rng& rng) {
    if (pairs.size() > m) {
        rng.partial_shuffle(pairs, m);
        pairs.resize(m);
    }
    return PlainRelation::from_pairs(n, std::move(pairs));
}

inline PlainRelation gen_random(const GenSpec& s, Rng& rng) {
    const std::uint64_t cells = std::uint64_t{s.n} * s.n;
    if (2 * s.m <= cells) {
        PairSet set;
        fill_uniform(set, s.n, s.m, rng);
        return PlainRelation::from_pairs(s.n, std::move(set.pairs()));
    }
    // Dense: draw the pairs to leave out instead.
    std::unordered_set<std::uint64_t> excluded;
    while (excluded.size() < cells - s.m)
        excluded.insert(pair_key(static_cast<NodeId>(rng.below(s.n)), static_cast<NodeId>(rng.below(s.n))));
    PlainRelation::Builder b(s.n);
    std::vector<NodeId> row;
    for (NodeId x = 0; x < s.n; ++x) {
        row.clear();
        for (NodeId y = 0; y < s.n; ++y)
            if (!excluded.count(pair_key(x, y)))
                row.push_back(y);
        b.add_row_unchecked(row);
    }
    return std::move(b).finish();
}

// Newman-Watts: ring lattice linking i to its k/2 successors (at least one),
// then uniform shortcuts; the surplus is trimmed uniformly.
inline PlainRelation gen_smallworld(const GenSpec& s, Rng& rng) {
    PairSet set;
    const std::uint64_t reach = std::max<std::uint64_t>(1, s.k / 2);
    for (NodeId i = 0; i < s.n; ++i)
        for (std::uint64_t j = 1; j <= reach; ++j)
            set.insert(i, static_cast<NodeId>((i + j) % s.n));
    fill_uniform(set, s.n, s.m, rng);
    return finish(s.n, std::move(set.pairs()), s.m, rng);
}

// Barabasi-Albert: k initial nodes without links; every later node links to
// k distinct targets drawn from the repeated-nodes list, which holds each
// node once per link end. Missing pairs are added the same way from random
// sources, falling back to uniform pairs if attachment keeps colliding.
inline PlainRelation gen_barabasi(const GenSpec& s, Rng& rng) {
    PairSet set;
    std::vector<NodeId> repeated;
    std::vector<NodeId> targets;
    for (NodeId t = 0; t < s.k; ++t)
        targets.push_back(t);
    for (auto source = static_cast<NodeId>(s.k); source < s.n; ++source) {
        for (auto t : targets)
            set.insert(source, t);
        repeated.insert(repeated.end(), targets.begin(), targets.end());
        repeated.insert(repeated.end(), s.k, source);
        targets.clear();
        while (targets.size() < s.k) {
            NodeId t = repeated[rng.below(repeated.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
    }
    std::uint64_t misses = 0;
    while (set.size() < s.m && misses < 64 * s.m && !repeated.empty()) {
        auto x = static_cast<NodeId>(rng.below(s.n));
        if (!set.insert(x, repeated[rng.below(repeated.size())]))
            ++misses;
    }
    fill_uniform(set, s.n, s.m, rng);
    return finish(s.n, std::move(set.pairs()), s.m, rng);
}

inline std::uint64_t cluster_side(const GenSpec& s) {
    if (s.cluster_side)
        return s.cluster_side;
    const double target = 0.95 * static_cast<double>(s.m);
    std::uint64_t side = 1;
    while (s.cluster_density * static_cast<double>(s.clusters * side * side) < target)
        ++side;
    return side;
}

} // namespace detail

// Cluster placement for a clustered GenSpec: non-overlapping cells of a
// grid with pitch `side`, chosen uniformly.
inline std::vector<Cluster> clusters_of(const GenSpec& s) {
    if (s.model != Model::clustered)
        return {};
    const std::uint64_t side = detail::cluster_side(s);
    const std::uint64_t per_axis = side ? s.n / side : 0;
    if (per_axis * per_axis < s.clusters)
        throw ArgumentError("clusters of side " + std::to_string(side) + " do not fit: " +
                            std::to_string(s.clusters) + " needed, " + std::to_string(per_axis * per_axis) +
                            " grid cells available");
    Rng rng(s.seed ^ 0x636c7573746572ULL);
    std::vector<std::uint64_t> cells(per_axis * per_axis);
    for (std::uint64_t i = 0; i < cells.size(); ++i)
        cells[i] = i;
    rng.partial_shuffle(cells, s.clusters);
    std::vector<Cluster> out;
    for (std::uint64_t i = 0; i < s.clusters; ++i)
        out.push_back({static_cast<NodeId>(cells[i] / per_axis * side), static_cast<NodeId>(cells[i] % per_axis * side),
                       static_cast<NodeId>(side)});
    return out;
}

inline std::uint64_t clustered_pair_target(const GenSpec& s) {
    const std::uint64_t side = detail::cluster_side(s);
    auto capacity = static_cast<std::uint64_t>(
        std::floor(s.cluster_density * static_cast<double>(s.clusters * side * side)));
    return std::min(s.m, capacity);
}

inline void validate(const GenSpec& s) {
    const std::uint64_t cells = std::uint64_t{s.n} * s.n;
    if (s.m > cells)
        throw ArgumentError("m=" + std::to_string(s.m) + " exceeds n^2=" + std::to_string(cells));
    if (s.model == Model::smallworld || s.model == Model::barabasi) {
        if (s.k < 1)
            throw ArgumentError("k must be at least 1");
        if (s.k >= s.n)
            throw ArgumentError("k=" + std::to_string(s.k) + " must be below n=" + std::to_string(s.n));
    }
    if (s.model == Model::clustered) {
        if (s.clusters < 1)
            throw ArgumentError("clustered model needs at least one cluster");
        if (!(s.cluster_density > 0.0 && s.cluster_density <= 1.0))
            throw ArgumentError("cluster density must lie in (0, 1]");
        if (s.m > 0) {
            clusters_of(s);
            if (10 * clustered_pair_target(s) < 9 * s.m)
                throw ArgumentError("clusters hold fewer than 90% of the m pairs; raise the side or density");
        }
    }
}

inline PlainRelation generate(const GenSpec& s) {
    validate(s);
    Rng rng(s.seed);
    switch (s.model) {
    case Model::random: return detail::gen_random(s, rng);
    case Model::smallworld: return detail::gen_smallworld(s, rng);
    case Model::barabasi: return detail::gen_barabasi(s, rng);
    case Model::clustered: break;
    }
    if (s.m == 0)
        return PlainRelation(s.n);
    detail::PairSet set;
    const auto clusters = clusters_of(s);
    const std::uint64_t inside = clustered_pair_target(s);
    const std::uint64_t side = clusters.front().side;
    while (set.size() < inside) {
        const auto& c = clusters[rng.below(clusters.size())];
        set.insert(static_cast<NodeId>(c.row + rng.below(side)), static_cast<NodeId>(c.col + rng.below(side)));
    }
    detail::fill_uniform(set, s.n, s.m, rng);
    return PlainRelation::from_pairs(s.n, std::move(set.pairs()));
}

} // namespace brel
