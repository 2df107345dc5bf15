#pragma once

// Binary Relation Wavelet Tree.
//
// Rows are bisected recursively; n_rows is padded to a power of two and the
// leaves cover two rows each. A node keeps, for each of its active columns,
// one bit for the top half of its rows (b_l) and one for the bottom half
// (b_r); a column descends into each half whose bit is 1. A node is stored
// as b_l followed by b_r, and the nodes of one level are concatenated left
// to right. Empty halves have no child node.
//
// Child addressing through ranks: the half starting at position `base` of a
// level owns the child whose bitmap starts at 2 * rank1(level, base) on the
// next level, and column offset c maps to rank1(base + c) - rank1(base).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brel/bitvec.hpp"
#include "brel/error.hpp"
#include "brel/io.hpp"
#include "brel/relation.hpp"

namespace brel {

namespace detail {

// Calls f(offset) for every set bit in [from, to), offsets relative to from.
template <typename F>
void for_each_one(const BitVector& bits, std::uint64_t from, std::uint64_t to, F&& f) {
    if (from >= to)
        return;
    auto words = bits.words();
    std::uint64_t w = from >> 6;
    const std::uint64_t last = (to - 1) >> 6;
    std::uint64_t word = words[w] & (~std::uint64_t{0} << (from & 63));
    while (true) {
        if (w == last && (to & 63))
            word &= (std::uint64_t{1} << (to & 63)) - 1;
        while (word) {
            f(w * 64 + static_cast<std::uint64_t>(std::countr_zero(word)) - from);
            word &= word - 1;
        }
        if (w == last)
            break;
        word = words[++w];
    }
}

// Appends src[pos, pos + count) to dest.
inline void append_range(BitVector& dest, const BitVector& src, std::uint64_t pos, std::uint64_t count) {
    while (count >= 64) {
        dest.append_bits(src.get_bits(pos, 64), 64);
        pos += 64;
        count -= 64;
    }
    if (count)
        dest.append_bits(src.get_bits(pos, static_cast<unsigned>(count)), static_cast<unsigned>(count));
}

} // namespace detail

class Brwt {
public:
    struct NodeInfo {
        std::uint64_t heap;
        std::uint64_t start;
        std::uint64_t width;
    };

    Brwt() = default;

    static Brwt build(const PlainRelation& r) {
        Brwt t;
        t.n_ = r.n();
        t.n_rows_ = std::max<std::uint64_t>(2, std::bit_ceil(std::uint64_t{r.n()}));
        const unsigned nlevels = static_cast<unsigned>(std::countr_zero(t.n_rows_));

        struct Pending {
            std::uint64_t lo;
            std::vector<NodeId> cols;
        };
        std::vector<Pending> current(1), next;
        current[0].lo = 0;
        current[0].cols.resize(r.n());
        for (NodeId y = 0; y < r.n(); ++y)
            current[0].cols[y] = y;

        // Stamps mark the columns seen in a half without clearing between nodes.
        std::vector<std::uint64_t> mark_top(r.n(), 0), mark_bottom(r.n(), 0);
        std::uint64_t stamp = 0;

        for (unsigned level = 0; level < nlevels; ++level) {
            const std::uint64_t span = t.n_rows_ >> level;
            const std::uint64_t half = span / 2;
            const bool leaf = level + 1 == nlevels;
            BitVector bits;
            next.clear();
            for (auto& node : current) {
                ++stamp;
                auto mark = [&](std::uint64_t from, std::uint64_t to, std::vector<std::uint64_t>& marks) {
                    for (std::uint64_t x = from; x < std::min<std::uint64_t>(to, r.n()); ++x)
                        for (auto y : r.row(static_cast<NodeId>(x)))
                            marks[y] = stamp;
                };
                mark(node.lo, node.lo + half, mark_top);
                mark(node.lo + half, node.lo + span, mark_bottom);
                Pending left{node.lo, {}}, right{node.lo + half, {}};
                for (auto y : node.cols) {
                    bool b = mark_top[y] == stamp;
                    bits.push_back(b);
                    if (b && !leaf)
                        left.cols.push_back(y);
                }
                for (auto y : node.cols) {
                    bool b = mark_bottom[y] == stamp;
                    bits.push_back(b);
                    if (b && !leaf)
                        right.cols.push_back(y);
                }
                if (!left.cols.empty())
                    next.push_back(std::move(left));
                if (!right.cols.empty())
                    next.push_back(std::move(right));
            }
            t.levels_.emplace_back(std::move(bits));
            std::swap(current, next);
        }
        return t;
    }

    NodeId n() const noexcept { return n_; }
    std::uint64_t n_rows() const noexcept { return n_rows_; }
    unsigned level_count() const noexcept { return static_cast<unsigned>(levels_.size()); }
    const RankBitVector& level(unsigned l) const noexcept { return levels_[l]; }
    std::uint64_t heap_size() const noexcept { return n_rows_ - 1; }
    bool is_leaf_level(unsigned l) const noexcept { return l + 1 == levels_.size(); }

    // Nodes of every level in storage order.
    std::vector<std::vector<NodeInfo>> nodes() const {
        std::vector<std::vector<NodeInfo>> out(levels_.size());
        if (levels_.empty())
            return out;
        out[0].push_back({0, 0, n_});
        for (unsigned l = 0; l + 1 < levels_.size(); ++l) {
            const auto& bits = levels_[l];
            for (const auto& node : out[l]) {
                for (std::uint64_t half = 0; half < 2; ++half) {
                    std::uint64_t base = node.start + half * node.width;
                    std::uint64_t r0 = bits.rank1_unchecked(base);
                    std::uint64_t w = bits.rank1_unchecked(base + node.width) - r0;
                    if (w > 0)
                        out[l + 1].push_back({2 * node.heap + 1 + half, 2 * r0, w});
                }
            }
        }
        return out;
    }

    // Width of every node indexed by heap number (root 0, children 2h+1
    // and 2h+2); absent nodes have width 0.
    std::vector<std::uint32_t> heap_widths() const {
        std::vector<std::uint32_t> width(heap_size(), 0);
        for (const auto& level : nodes())
            for (const auto& node : level)
                width[node.heap] = static_cast<std::uint32_t>(node.width);
        return width;
    }

    // Resident bytes: bitmap words plus rank directories.
    std::uint64_t memory_bytes() const noexcept {
        std::uint64_t bytes = 0;
        for (const auto& level : levels_)
            bytes += level.bits().words().size() * sizeof(std::uint64_t) + level.directory_bytes();
        return bytes;
    }

    bool is_related(NodeId x, NodeId y) const {
        check_node(x, n_, "row");
        check_node(y, n_, "column");
        std::uint64_t start = 0, width = n_, col = y, lo = 0, span = n_rows_;
        for (unsigned l = 0;; ++l) {
            const auto& bits = levels_[l];
            const std::uint64_t half = span / 2;
            const std::uint64_t h = x >= lo + half;
            const std::uint64_t base = start + h * width;
            if (!bits[base + col])
                return false;
            if (is_leaf_level(l))
                return true;
            const std::uint64_t r0 = bits.rank1_unchecked(base);
            col = bits.rank1_unchecked(base + col) - r0;
            width = bits.rank1_unchecked(base + width) - r0;
            start = 2 * r0;
            lo += h * half;
            span = half;
        }
    }

    std::vector<NodeId> successors(NodeId x) const {
        check_node(x, n_, "row");
        std::vector<NodeId> ids, next;
        std::uint64_t start = 0, width = n_, lo = 0, span = n_rows_;
        for (unsigned l = 0;; ++l) {
            const auto& bits = levels_[l];
            const std::uint64_t half = span / 2;
            const std::uint64_t h = x >= lo + half;
            const std::uint64_t base = start + h * width;
            next.clear();
            if (l == 0)
                detail::for_each_one(bits.bits(), base, base + width,
                                     [&](std::uint64_t c) { next.push_back(static_cast<NodeId>(c)); });
            else
                detail::for_each_one(bits.bits(), base, base + width, [&](std::uint64_t c) { next.push_back(ids[c]); });
            std::swap(ids, next);
            if (ids.empty() || is_leaf_level(l))
                return ids;
            start = 2 * bits.rank1_unchecked(base);
            width = ids.size();
            lo += h * half;
            span = half;
        }
    }

    std::vector<NodeId> predecessors(NodeId y) const {
        check_node(y, n_, "column");
        std::vector<NodeId> out;
        predecessors_rec(0, 0, n_, y, 0, n_rows_, out);
        return out;
    }

    std::vector<Pair> range_neighborhood(const RangeQuery& q) const {
        q.validate(n_);
        std::vector<Pair> out;
        std::vector<NodeId> ids(q.y2 - q.y1 + 1);
        for (NodeId i = 0; i < ids.size(); ++i)
            ids[i] = q.y1 + i;
        range_rec(q, 0, 0, n_, q.y1, ids, 0, n_rows_, out);
        return out;
    }

    PlainRelation decode() const {
        if (n_ == 0)
            return PlainRelation(0);
        return PlainRelation::from_pairs(n_, range_neighborhood({0, 0, n_ - 1, n_ - 1}));
    }

    // Header, per-level node counts and u32 widths, and bitmap payloads
    // rounded to bytes; i.e. the serialized form without bitvec length
    // prefixes or word padding. Rank directories are not counted.
    std::uint64_t size_in_bytes() const {
        std::uint64_t bytes = 4 + 4 + 4 + 2;
        auto all = nodes();
        for (unsigned l = 0; l < levels_.size(); ++l)
            bytes += 4 + 4 * all[l].size() + levels_[l].bits().payload_bytes();
        return bytes;
    }

    std::string serialize() const {
        io::ByteWriter out;
        out.put_bytes(magic);
        out.put_u32(n_);
        out.put_u32(static_cast<std::uint32_t>(n_rows_));
        out.put_u16(static_cast<std::uint16_t>(levels_.size()));
        auto all = nodes();
        for (unsigned l = 0; l < levels_.size(); ++l) {
            out.put_u32(static_cast<std::uint32_t>(all[l].size()));
            for (const auto& node : all[l])
                out.put_u32(static_cast<std::uint32_t>(node.width));
            levels_[l].serialize(out);
        }
        return out.release();
    }

    static Brwt deserialize(std::string_view bytes) {
        io::ByteReader in(bytes);
        in.expect_magic(magic);
        Brwt t;
        t.n_ = in.get_u32("n");
        t.n_rows_ = in.get_u32("n_rows");
        if (t.n_rows_ != std::max<std::uint64_t>(2, std::bit_ceil(std::uint64_t{t.n_})))
            throw FormatError("BRWT row count is not the padded node count");
        const unsigned nlevels = in.get_u16("level count");
        if (nlevels != static_cast<unsigned>(std::countr_zero(t.n_rows_)))
            throw FormatError("BRWT level count does not match n_rows");
        std::vector<std::uint64_t> expected{t.n_};
        for (unsigned l = 0; l < nlevels; ++l) {
            std::uint32_t count = in.get_u32("node count");
            if (count != expected.size())
                throw FormatError("BRWT level " + std::to_string(l) + ": node count mismatch");
            std::uint64_t total = 0;
            for (auto w : expected) {
                if (in.get_u32("node width") != w)
                    throw FormatError("BRWT level " + std::to_string(l) + ": node width mismatch");
                total += w;
            }
            auto bits = RankBitVector::deserialize(in);
            if (bits.size() != 2 * total)
                throw FormatError("BRWT level " + std::to_string(l) + ": bitmap length mismatch");
            std::vector<std::uint64_t> widths;
            std::uint64_t pos = 0;
            for (auto w : l + 1 < nlevels ? expected : std::vector<std::uint64_t>{}) {
                for (int half = 0; half < 2; ++half) {
                    auto ones = bits.rank1_unchecked(pos + w) - bits.rank1_unchecked(pos);
                    if (ones)
                        widths.push_back(ones);
                    pos += w;
                }
            }
            t.levels_.push_back(std::move(bits));
            expected = std::move(widths);
        }
        in.expect_end("BRWT");
        return t;
    }

    friend bool operator==(const Brwt& a, const Brwt& b) noexcept {
        return a.n_ == b.n_ && a.n_rows_ == b.n_rows_ && a.levels_ == b.levels_;
    }

    static constexpr std::string_view magic = "BRWT";

private:
    friend class BrwtAssembler;
    friend Brwt union_brwt(const Brwt&, const Brwt&);

    static Brwt from_levels(NodeId n, std::uint64_t n_rows, std::vector<BitVector> levels) {
        Brwt t;
        t.n_ = n;
        t.n_rows_ = n_rows;
        for (auto& bits : levels)
            t.levels_.emplace_back(std::move(bits));
        return t;
    }

    void predecessors_rec(unsigned l, std::uint64_t start, std::uint64_t width, std::uint64_t col, std::uint64_t lo,
                          std::uint64_t span, std::vector<NodeId>& out) const {
        const auto& bits = levels_[l];
        const std::uint64_t half = span / 2;
        for (std::uint64_t h = 0; h < 2; ++h) {
            const std::uint64_t base = start + h * width;
            if (!bits[base + col])
                continue;
            if (is_leaf_level(l)) {
                out.push_back(static_cast<NodeId>(lo + h));
                continue;
            }
            const std::uint64_t r0 = bits.rank1_unchecked(base);
            predecessors_rec(l + 1, 2 * r0, bits.rank1_unchecked(base + width) - r0,
                             bits.rank1_unchecked(base + col) - r0, lo + h * half, half, out);
        }
    }

    // `ids` are the column ids at positions [first, first + ids.size()).
    void range_rec(const RangeQuery& q, unsigned l, std::uint64_t start, std::uint64_t width, std::uint64_t first,
                   const std::vector<NodeId>& ids, std::uint64_t lo, std::uint64_t span,
                   std::vector<Pair>& out) const {
        const auto& bits = levels_[l];
        const std::uint64_t half = span / 2;
        std::vector<NodeId> next;
        for (std::uint64_t h = 0; h < 2; ++h) {
            const std::uint64_t row_lo = lo + h * half;
            if (row_lo > q.x2 || row_lo + half - 1 < q.x1)
                continue;
            const std::uint64_t base = start + h * width;
            next.clear();
            detail::for_each_one(bits.bits(), base + first, base + first + ids.size(),
                                 [&](std::uint64_t c) { next.push_back(ids[c]); });
            if (next.empty())
                continue;
            if (is_leaf_level(l)) {
                for (auto y : next)
                    out.push_back({static_cast<NodeId>(row_lo), y});
                continue;
            }
            const std::uint64_t r0 = bits.rank1_unchecked(base);
            range_rec(q, l + 1, 2 * r0, bits.rank1_unchecked(base + width) - r0,
                      bits.rank1_unchecked(base + first) - r0, next, row_lo, half, out);
        }
    }

    NodeId n_ = 0;
    std::uint64_t n_rows_ = 2;
    std::vector<RankBitVector> levels_;
};

// Per-node cursors into the level bitmaps, two slots per node: slot
// id_node points into b_l and id_node + 1 into b_r, where id_node = 2 * heap.
// Children of id_node are (id_node + 1) * 2 and (id_node + 2) * 2.
class CursorTable {
public:
    using Cursor = std::uint32_t;

    CursorTable() = default;

    // Points every node's cursors at the start of its b_l and b_r.
    explicit CursorTable(const Brwt& x) : slots_(2 * x.heap_size(), 0) {
        for (unsigned l = 0; l < x.level_count(); ++l)
            if (x.level(l).size() > std::numeric_limits<Cursor>::max())
                throw ArgumentError("BRWT level too large for 32-bit cursors");
        for (const auto& level : x.nodes())
            for (const auto& node : level) {
                slots_[2 * node.heap] = static_cast<Cursor>(node.start);
                slots_[2 * node.heap + 1] = static_cast<Cursor>(node.start + node.width);
            }
    }

    Cursor& operator[](std::uint64_t slot) noexcept { return slots_[slot]; }
    Cursor operator[](std::uint64_t slot) const noexcept { return slots_[slot]; }
    std::uint64_t slot_count() const noexcept { return slots_.size(); }
    std::uint64_t memory_bytes() const noexcept { return slots_.size() * sizeof(Cursor); }

    // True when every node's cursors sit exactly one node width past their
    // initial positions, i.e. each active column was consumed once.
    bool conserved(const Brwt& x) const {
        for (const auto& level : x.nodes())
            for (const auto& node : level)
                if (slots_[2 * node.heap] != node.start + node.width ||
                    slots_[2 * node.heap + 1] != node.start + 2 * node.width)
                    return false;
        return true;
    }

private:
    std::vector<Cursor> slots_;
};

inline unsigned heap_level(std::uint64_t heap) noexcept { return static_cast<unsigned>(std::bit_width(heap + 1) - 1); }

// Output of a set operation: each heap node gets a region sized for its
// largest possible width, b_l in the first half and b_r in the second.
// assemble() packs the used prefix of every region into level bitmaps.
class BrwtAssembler {
public:
    BrwtAssembler(NodeId n, std::uint64_t n_rows, std::vector<std::uint32_t> capacity)
        : n_(n), n_rows_(n_rows), offset_(capacity.size()), capacity_(std::move(capacity)),
          count_(capacity_.size(), 0) {
        const unsigned nlevels = static_cast<unsigned>(std::countr_zero(n_rows));
        levels_.resize(nlevels);
        for (unsigned l = 0; l < nlevels; ++l) {
            std::uint64_t total = 0;
            std::uint64_t first = (std::uint64_t{1} << l) - 1, last = (std::uint64_t{2} << l) - 1;
            for (auto h = first; h < last; ++h) {
                offset_[h] = total;
                total += 2 * std::uint64_t{capacity_[h]};
            }
            levels_[l] = BitVector(total);
        }
    }

    void append(std::uint64_t heap, bool left, bool right) {
        auto& bits = levels_[heap_level(heap)];
        const std::uint64_t pos = offset_[heap] + count_[heap]++;
        if (left)
            bits.set(pos, true);
        if (right)
            bits.set(pos + capacity_[heap], true);
    }

    std::uint32_t width(std::uint64_t heap) const noexcept { return count_[heap]; }

    std::uint64_t memory_bytes() const noexcept {
        std::uint64_t bytes = offset_.size() * sizeof(std::uint64_t) + 2 * count_.size() * sizeof(std::uint32_t);
        for (const auto& level : levels_)
            bytes += level.words().size() * sizeof(std::uint64_t);
        return bytes;
    }

    // (b_l, b_r) bits appended to `heap` so far, as a "01.." string.
    std::string node_bits(std::uint64_t heap) const {
        std::string s;
        const auto& bits = levels_[heap_level(heap)];
        for (int half = 0; half < 2; ++half)
            for (std::uint32_t i = 0; i < count_[heap]; ++i)
                s.push_back(bits[offset_[heap] + half * capacity_[heap] + i] ? '1' : '0');
        return s;
    }

    Brwt assemble() const {
        std::vector<BitVector> result;
        for (unsigned l = 0; l < levels_.size(); ++l) {
            BitVector packed;
            std::uint64_t first = (std::uint64_t{1} << l) - 1, last = (std::uint64_t{2} << l) - 1;
            for (auto h = first; h < last; ++h) {
                if (count_[h] == 0)
                    continue;
                detail::append_range(packed, levels_[l], offset_[h], count_[h]);
                detail::append_range(packed, levels_[l], offset_[h] + capacity_[h], count_[h]);
            }
            result.push_back(std::move(packed));
        }
        return Brwt::from_levels(n_, n_rows_, std::move(result));
    }

private:
    NodeId n_;
    std::uint64_t n_rows_;
    std::vector<std::uint64_t> offset_;
    std::vector<std::uint32_t> capacity_;
    std::vector<std::uint32_t> count_;
    std::vector<BitVector> levels_;
};

// How the depth-first set operations move from a node to its children.
enum class Navigation {
    cursor, // per-node cursor table, advanced column by column
    rank    // child positions recomputed with rank1 on every step
};

namespace detail {

// Cursor navigation: a position is the node's slot pair id.
class CursorNav {
public:
    using Pos = std::uint64_t;
    static constexpr bool needs_skip = true;

    CursorNav(const Brwt& x, CursorTable& cursors) : x_(x), cur_(cursors) {}

    Pos root(std::uint64_t) const noexcept { return 0; }
    std::pair<bool, bool> bits(unsigned l, Pos id) const noexcept {
        const auto& level = x_.level(l);
        return {level[cur_[id]], level[cur_[id + 1]]};
    }
    Pos left(unsigned, Pos id) const noexcept { return (id + 1) * 2; }
    Pos right(unsigned, Pos id) const noexcept { return (id + 2) * 2; }
    void advance(Pos id) noexcept {
        ++cur_[id];
        ++cur_[id + 1];
    }
    bool is_leaf(unsigned l) const noexcept { return x_.is_leaf_level(l); }

private:
    const Brwt& x_;
    CursorTable& cur_;
};

// Rank navigation: a position is (node start, node width, column offset).
class RankNav {
public:
    struct Pos {
        std::uint64_t start, width, col;
    };
    static constexpr bool needs_skip = false;

    explicit RankNav(const Brwt& x) : x_(x) {}

    Pos root(std::uint64_t col) const noexcept { return {0, x_.n(), col}; }
    std::pair<bool, bool> bits(unsigned l, const Pos& p) const noexcept {
        const auto& level = x_.level(l);
        return {level[p.start + p.col], level[p.start + p.width + p.col]};
    }
    Pos left(unsigned l, const Pos& p) const noexcept { return child(x_.level(l), p.start, p); }
    Pos right(unsigned l, const Pos& p) const noexcept { return child(x_.level(l), p.start + p.width, p); }
    void advance(const Pos&) const noexcept {}
    bool is_leaf(unsigned l) const noexcept { return x_.is_leaf_level(l); }

private:
    static Pos child(const RankBitVector& level, std::uint64_t base, const Pos& p) noexcept {
        const std::uint64_t r0 = level.rank1_unchecked(base);
        return {2 * r0, level.rank1_unchecked(base + p.width) - r0, level.rank1_unchecked(base + p.col) - r0};
    }

    const Brwt& x_;
};

// Advances the cursors of one column through the subtree below id_node.
template <typename Nav>
void skip_column(Nav& nav, unsigned l, typename Nav::Pos id_node) {
    if constexpr (Nav::needs_skip) {
        auto [left, right] = nav.bits(l, id_node);
        if (!nav.is_leaf(l)) {
            if (left)
                skip_column(nav, l + 1, nav.left(l, id_node));
            if (right)
                skip_column(nav, l + 1, nav.right(l, id_node));
        }
        nav.advance(id_node);
    }
}

// Copies one column of the subtree below `heap` into the output.
template <typename Nav>
void copy_column(Nav& nav, unsigned l, typename Nav::Pos pos, std::uint64_t heap, BrwtAssembler& out) {
    auto [left, right] = nav.bits(l, pos);
    if (!nav.is_leaf(l)) {
        if (left)
            copy_column(nav, l + 1, nav.left(l, pos), 2 * heap + 1, out);
        if (right)
            copy_column(nav, l + 1, nav.right(l, pos), 2 * heap + 2, out);
    }
    out.append(heap, left, right);
    nav.advance(pos);
}

// Column-by-column depth-first traversal shared by intersection, difference
// and symmetric difference. They differ only in the leaf rule and in what
// happens to a column defined in one operand only (skip or copy).
template <SetOp Op, typename Nav>
class DepthFirstSetOp {
public:
    DepthFirstSetOp(Nav a, Nav b, BrwtAssembler& out) : a_(a), b_(b), out_(out) {}

    void run(std::uint64_t columns) {
        for (std::uint64_t i = 0; i < columns; ++i)
            visit(0, 0, a_.root(i), b_.root(i));
    }

private:
    using Pos = typename Nav::Pos;

    static constexpr bool leaf_rule(bool a, bool b) noexcept {
        if constexpr (Op == SetOp::intersection)
            return a && b;
        else if constexpr (Op == SetOp::difference)
            return a && !b;
        else
            return a != b;
    }

    // Column defined in both operands at this node; returns whether the
    // result keeps the column here.
    bool visit(unsigned l, std::uint64_t heap, Pos pa, Pos pb) {
        auto [a1, a2] = a_.bits(l, pa);
        auto [b1, b2] = b_.bits(l, pb);
        bool kl, kr;
        if (!a_.is_leaf(l)) {
            kl = child(l, 2 * heap + 1, a1, b1, pa, pb, false);
            kr = child(l, 2 * heap + 2, a2, b2, pa, pb, true);
        } else {
            kl = leaf_rule(a1, b1);
            kr = leaf_rule(a2, b2);
        }
        if (kl || kr || heap == 0)
            out_.append(heap, kl, kr);
        a_.advance(pa);
        b_.advance(pb);
        return kl || kr;
    }

    bool child(unsigned l, std::uint64_t heap, bool in_a, bool in_b, const Pos& pa, const Pos& pb, bool right) {
        auto descend = [&](Nav& nav, const Pos& p) { return right ? nav.right(l, p) : nav.left(l, p); };
        if (in_a && in_b)
            return visit(l + 1, heap, descend(a_, pa), descend(b_, pb));
        if (in_a) {
            if constexpr (Op == SetOp::intersection) {
                skip_column(a_, l + 1, descend(a_, pa));
                return false;
            } else {
                copy_column(a_, l + 1, descend(a_, pa), heap, out_);
                return true;
            }
        }
        if (in_b) {
            if constexpr (Op == SetOp::symmetric_difference) {
                copy_column(b_, l + 1, descend(b_, pb), heap, out_);
                return true;
            } else {
                skip_column(b_, l + 1, descend(b_, pb));
                return false;
            }
        }
        return false;
    }

    Nav a_, b_;
    BrwtAssembler& out_;
};

inline void check_same_shape(const Brwt& a, const Brwt& b) {
    if (a.n() != b.n() || a.n_rows() != b.n_rows())
        throw DimensionMismatch("BRWT dimensions differ: " + std::to_string(a.n()) + " vs " + std::to_string(b.n()));
}

// Output regions sized for the widest result each node can have.
template <SetOp Op>
BrwtAssembler make_assembler(const Brwt& a, const Brwt& b) {
    auto capacity = a.heap_widths();
    if constexpr (Op != SetOp::difference) {
        auto wb = b.heap_widths();
        for (std::uint64_t h = 0; h < capacity.size(); ++h)
            capacity[h] = Op == SetOp::intersection ? std::min(capacity[h], wb[h]) : capacity[h] + wb[h];
    }
    capacity[0] = a.n();
    return BrwtAssembler(a.n(), a.n_rows(), std::move(capacity));
}

template <SetOp Op>
Brwt depth_first(const Brwt& a, const Brwt& b, Navigation nav, CursorTable* ca_out, CursorTable* cb_out) {
    BrwtAssembler out = make_assembler<Op>(a, b);
    if (nav == Navigation::cursor) {
        CursorTable ca(a), cb(b);
        DepthFirstSetOp<Op, CursorNav> op(CursorNav(a, ca), CursorNav(b, cb), out);
        op.run(a.n());
        if (ca_out)
            *ca_out = std::move(ca);
        if (cb_out)
            *cb_out = std::move(cb);
    } else {
        DepthFirstSetOp<Op, RankNav> op(RankNav(a), RankNav(b), out);
        op.run(a.n());
    }
    return out.assemble();
}

} // namespace detail

// Breadth-first union over the level bitmaps of both operands.
//
// Each queue entry is a flag pair <f_a, f_b>: whether the current column is
// defined in a and in b at the node being scanned. A <0,0> entry ends a
// node. queue_left drives the traversal; every pair read while emitting b_l
// is replayed from queue_right to emit b_r, since a node stores b_l then b_r.
inline Brwt union_brwt(const Brwt& a, const Brwt& b) {
    detail::check_same_shape(a, b);
    struct FlagPair {
        bool in_a, in_b;
    };
    std::deque<FlagPair> queue_left, queue_right;
    for (NodeId i = 0; i < a.n(); ++i)
        queue_left.push_back({true, true});
    queue_left.push_back({false, false});

    std::vector<BitVector> result(a.level_count());
    std::uint64_t nodes_in_level = 1;
    for (unsigned l = 0; l < a.level_count(); ++l) {
        const auto& la = a.level(l);
        const auto& lb = b.level(l);
        const bool leaf = a.is_leaf_level(l);
        auto& out = result[l];
        std::uint64_t pa = 0, pb = 0, next_nodes = 0;

        auto emit = [&](FlagPair f, std::uint64_t& children) {
            const bool ba = f.in_a && la[pa];
            const bool bb = f.in_b && lb[pb];
            if ((ba || bb) && !leaf) {
                queue_left.push_back({ba, bb});
                ++children;
            }
            out.push_back(ba || bb);
            pa += f.in_a;
            pb += f.in_b;
        };
        auto close_child = [&](std::uint64_t children) {
            if (!leaf && children > 0) {
                queue_left.push_back({false, false});
                ++next_nodes;
            }
        };

        for (std::uint64_t node = 0; node < nodes_in_level; ++node) {
            std::uint64_t children = 0;
            FlagPair f = queue_left.front();
            queue_left.pop_front();
            while (f.in_a || f.in_b) {
                queue_right.push_back(f);
                emit(f, children);
                f = queue_left.front();
                queue_left.pop_front();
            }
            close_child(children);

            children = 0;
            while (!queue_right.empty()) {
                f = queue_right.front();
                queue_right.pop_front();
                emit(f, children);
            }
            close_child(children);
        }
        nodes_in_level = next_nodes;
    }

    return Brwt::from_levels(a.n(), a.n_rows(), std::move(result));
}

inline Brwt intersect_brwt(const Brwt& a, const Brwt& b, Navigation nav = Navigation::cursor) {
    detail::check_same_shape(a, b);
    return detail::depth_first<SetOp::intersection>(a, b, nav, nullptr, nullptr);
}

inline Brwt difference_brwt(const Brwt& a, const Brwt& b, Navigation nav = Navigation::cursor) {
    detail::check_same_shape(a, b);
    return detail::depth_first<SetOp::difference>(a, b, nav, nullptr, nullptr);
}

inline Brwt symdiff_brwt(const Brwt& a, const Brwt& b, Navigation nav = Navigation::cursor) {
    detail::check_same_shape(a, b);
    return detail::depth_first<SetOp::symmetric_difference>(a, b, nav, nullptr, nullptr);
}

// Runs a depth-first operation with cursor navigation and hands back both
// cursor tables in their final state.
inline Brwt traced_set_operation(SetOp op, const Brwt& a, const Brwt& b, CursorTable& cursors_a,
                                 CursorTable& cursors_b) {
    detail::check_same_shape(a, b);
    switch (op) {
    case SetOp::intersection:
        return detail::depth_first<SetOp::intersection>(a, b, Navigation::cursor, &cursors_a, &cursors_b);
    case SetOp::difference:
        return detail::depth_first<SetOp::difference>(a, b, Navigation::cursor, &cursors_a, &cursors_b);
    case SetOp::symmetric_difference:
        return detail::depth_first<SetOp::symmetric_difference>(a, b, Navigation::cursor, &cursors_a, &cursors_b);
    case SetOp::union_:
        break;
    }
    throw ArgumentError("union has no cursor traversal");
}

inline Brwt set_operation(SetOp op, const Brwt& a, const Brwt& b, Navigation nav = Navigation::cursor) {
    switch (op) {
    case SetOp::union_:
        return union_brwt(a, b);
    case SetOp::intersection:
        return intersect_brwt(a, b, nav);
    case SetOp::difference:
        return difference_brwt(a, b, nav);
    case SetOp::symmetric_difference:
        return symdiff_brwt(a, b, nav);
    }
    throw ArgumentError("unknown set operation");
}

namespace detail {

inline void check_cursor(const Brwt& x, const CursorTable& cursors, std::uint64_t id_node) {
    const std::uint64_t heap = id_node / 2;
    if (id_node % 2 != 0 || heap >= x.heap_size())
        throw ArgumentError("invalid BRWT node id " + std::to_string(id_node));
    const auto nodes = x.nodes();
    for (const auto& node : nodes[heap_level(heap)])
        if (node.heap == heap) {
            if (cursors[id_node] >= node.start + node.width)
                throw std::logic_error("BRWT cursor overrun at node " + std::to_string(id_node));
            return;
        }
    throw ArgumentError("BRWT has no node " + std::to_string(id_node));
}

} // namespace detail

// Extra memory of cursor navigation for an intersection: both cursor
// tables, against the working set of the same intersection under rank
// navigation (resident operands, output assembly buffers, result).
struct NavigationMemory {
    std::uint64_t cursor_tables = 0;
    std::uint64_t rank_working_set = 0;

    double overhead() const noexcept {
        return rank_working_set ? static_cast<double>(cursor_tables) / static_cast<double>(rank_working_set) : 0.0;
    }
};

inline NavigationMemory intersection_navigation_memory(const Brwt& a, const Brwt& b) {
    detail::check_same_shape(a, b);
    NavigationMemory m;
    m.cursor_tables = CursorTable(a).memory_bytes() + CursorTable(b).memory_bytes();
    m.rank_working_set = a.memory_bytes() + b.memory_bytes() +
                         detail::make_assembler<SetOp::intersection>(a, b).memory_bytes() +
                         intersect_brwt(a, b, Navigation::rank).memory_bytes();
    return m;
}

// Advances the cursors of the column under cursors[id_node] through the
// subtree rooted at id_node without emitting anything.
inline void skip(const Brwt& x, CursorTable& cursors, std::uint64_t id_node) {
    detail::check_cursor(x, cursors, id_node);
    detail::CursorNav nav(x, cursors);
    detail::skip_column(nav, heap_level(id_node / 2), id_node);
}

// As skip, but appends the column's bits to the matching output nodes.
inline void copy(const Brwt& x, CursorTable& cursors, BrwtAssembler& out, std::uint64_t id_node) {
    detail::check_cursor(x, cursors, id_node);
    detail::CursorNav nav(x, cursors);
    detail::copy_column(nav, heap_level(id_node / 2), id_node, id_node / 2, out);
}

} // namespace brel
