#pragma once

// Independent reference computations for the tests. Nothing here reuses the
// library's algorithms: relations are handled as dense boolean matrices or
// std::set of pairs, and the compressed layouts are rebuilt by direct
// recursion over submatrices.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "brel/random.hpp"
#include "brel/relation.hpp"

namespace brel::test {

using PairSet = std::set<std::pair<NodeId, NodeId>>;

inline PairSet pairs_of(const PlainRelation& r) {
    PairSet s;
    for (NodeId x = 0; x < r.n(); ++x)
        for (auto y : r.row(x))
            s.insert({x, y});
    return s;
}

inline PlainRelation relation_of(NodeId n, const PairSet& s) {
    std::vector<Pair> v;
    for (auto [x, y] : s)
        v.push_back({x, y});
    return PlainRelation::from_pairs(n, v);
}

inline PairSet brute_set_op(SetOp op, const PairSet& a, const PairSet& b) {
    PairSet out;
    for (const auto& p : a)
        if (op == SetOp::union_ || (op == SetOp::intersection && b.count(p)) ||
            ((op == SetOp::difference || op == SetOp::symmetric_difference) && !b.count(p)))
            out.insert(p);
    for (const auto& p : b)
        if ((op == SetOp::union_ || op == SetOp::symmetric_difference) && !a.count(p))
            out.insert(p);
    return out;
}

struct Dense {
    NodeId n = 0;
    std::vector<std::vector<bool>> cell;

    explicit Dense(const PlainRelation& r) : n(r.n()), cell(r.n(), std::vector<bool>(r.n(), false)) {
        for (NodeId x = 0; x < n; ++x)
            for (auto y : r.row(x))
                cell[x][y] = true;
    }

    // Padding cells outside n read as 0.
    bool at(std::uint64_t x, std::uint64_t y) const { return x < n && y < n && cell[x][y]; }

    std::uint64_t ones(std::uint64_t x0, std::uint64_t y0, std::uint64_t side) const {
        std::uint64_t c = 0;
        for (auto x = x0; x < x0 + side; ++x)
            for (auto y = y0; y < y0 + side; ++y)
                c += at(x, y);
        return c;
    }
};

// Each cell set with probability `density`; every relation a pure function
// of the rng state.
inline PlainRelation random_relation(Rng& rng, NodeId n, double density) {
    const auto threshold = static_cast<std::uint64_t>(density * 1'000'000.0);
    PlainRelation::Builder b(n);
    std::vector<NodeId> row;
    for (NodeId x = 0; x < n; ++x) {
        row.clear();
        for (NodeId y = 0; y < n; ++y)
            if (rng.below(1'000'000) < threshold)
                row.push_back(y);
        b.add_row(row);
    }
    return std::move(b).finish();
}

// Rows made of a few long consecutive runs plus scattered ids, with some
// rows left empty.
inline PlainRelation runny_relation(Rng& rng, NodeId n) {
    PlainRelation::Builder b(n);
    std::vector<bool> mark(n);
    std::vector<NodeId> row;
    for (NodeId x = 0; x < n; ++x) {
        std::fill(mark.begin(), mark.end(), false);
        if (rng.below(4) != 0) {
            for (int r = 0, runs = static_cast<int>(rng.below(3)); r <= runs; ++r) {
                auto start = rng.below(n);
                auto len = rng.below(n - start) + 1;
                for (auto y = start; y < start + len; ++y)
                    mark[y] = true;
            }
            for (int s = 0; s < 3; ++s)
                mark[rng.below(n)] = true;
        }
        row.clear();
        for (NodeId y = 0; y < n; ++y)
            if (mark[y])
                row.push_back(y);
        b.add_row(row);
    }
    return std::move(b).finish();
}

inline std::string bits_string(const std::vector<bool>& v) {
    std::string s;
    for (bool b : v)
        s.push_back(b ? '1' : '0');
    return s;
}

struct NaiveK2 {
    std::string t, l, u;
};

// Level order by a queue of submatrices; the root is always subdivided,
// the last level stores single cells, minimum height 2.
inline NaiveK2 naive_k2(const PlainRelation& r, bool ones_variant) {
    Dense d(r);
    std::uint64_t side = 4;
    while (side < r.n())
        side *= 2;
    struct Block {
        std::uint64_t x, y, side;
    };
    std::deque<Block> queue{{0, 0, side}};
    std::string t, l, ut, ul;
    while (!queue.empty()) {
        auto b = queue.front();
        queue.pop_front();
        const auto half = b.side / 2;
        for (int q = 0; q < 4; ++q) {
            Block c{b.x + (q / 2) * half, b.y + (q % 2) * half, half};
            const auto count = d.ones(c.x, c.y, c.side);
            if (half == 1) {
                l.push_back(count ? '1' : '0');
                if (ones_variant && !count)
                    ul.push_back('0');
                continue;
            }
            bool one = ones_variant ? (count > 0 && count < half * half) : count > 0;
            t.push_back(one ? '1' : '0');
            if (one)
                queue.push_back(c);
            else if (ones_variant)
                ut.push_back(count == half * half ? '1' : '0');
        }
    }
    return {t, l, ones_variant ? ut + ul : std::string()};
}

// BRWT levels from the definition: per node and active column, b_l marks a
// 1 among the node's top rows and b_r among its bottom rows; leaves hold
// two rows.
inline std::vector<std::string> naive_brwt(const PlainRelation& r) {
    Dense d(r);
    std::uint64_t rows = 2;
    while (rows < r.n())
        rows *= 2;
    struct Node {
        std::uint64_t lo, span;
        std::vector<NodeId> cols;
    };
    std::vector<Node> level{{0, rows, {}}};
    for (NodeId y = 0; y < r.n(); ++y)
        level[0].cols.push_back(y);
    std::vector<std::string> out;
    for (auto span = rows; span >= 2; span /= 2) {
        std::string bits;
        std::vector<Node> next;
        for (const auto& node : level) {
            const auto half = node.span / 2;
            Node top{node.lo, half, {}}, bottom{node.lo + half, half, {}};
            std::string bl, br;
            for (auto y : node.cols) {
                bool in_top = false, in_bottom = false;
                for (auto x = node.lo; x < node.lo + half; ++x)
                    in_top = in_top || d.at(x, y);
                for (auto x = node.lo + half; x < node.lo + node.span; ++x)
                    in_bottom = in_bottom || d.at(x, y);
                bl.push_back(in_top ? '1' : '0');
                br.push_back(in_bottom ? '1' : '0');
                if (in_top)
                    top.cols.push_back(y);
                if (in_bottom)
                    bottom.cols.push_back(y);
            }
            bits += bl + br;
            if (half >= 2) {
                if (!top.cols.empty())
                    next.push_back(top);
                if (!bottom.cols.empty())
                    next.push_back(bottom);
            }
        }
        out.push_back(bits);
        level = std::move(next);
    }
    return out;
}

inline std::string temp_path(const std::string& name) {
    std::filesystem::path dir = BREL_TEST_TMP;
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

inline const PlainRelation& m1() {
    static const PlainRelation r = PlainRelation::from_pairs(4, {{0, 0}, {0, 1}, {1, 2}, {3, 3}});
    return r;
}

inline const PlainRelation& m2() {
    static const PlainRelation r = PlainRelation::from_pairs(4, {{0, 1}, {2, 2}, {3, 0}, {3, 3}});
    return r;
}

} // namespace brel::test
