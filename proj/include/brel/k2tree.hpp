#pragma once

// k^2-tree (k = 2) over a square binary relation, in two flavours:
//
//   K2Tree      a 1 marks a non-empty submatrix, 0 an empty one.
//   K2TreeOnes  a 1 marks a mixed submatrix, 0 a uniform one; U tells
//               whether each uniform block is all ones or all zeros.
//
// Bits are kept in level order. T holds levels 1..height-1, L holds the last
// level (one bit per cell). Children of each subdivision are in row-major
// quadrant order: top-left, top-right, bottom-left, bottom-right.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brel/bitvec.hpp"
#include "brel/error.hpp"
#include "brel/io.hpp"
#include "brel/relation.hpp"

namespace brel {

namespace detail {

// Spreads the 32 bits of v into the even bit positions of a 64-bit word.
constexpr std::uint64_t spread_bits(std::uint64_t v) noexcept {
    v &= 0xFFFFFFFFULL;
    v = (v | (v << 16)) & 0x0000FFFF0000FFFFULL;
    v = (v | (v << 8)) & 0x00FF00FF00FF00FFULL;
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0FULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
}

// Quadtree path of a cell: one base-4 digit (2*row_bit + col_bit) per level.
constexpr std::uint64_t zorder_key(NodeId x, NodeId y) noexcept { return (spread_bits(x) << 1) | spread_bits(y); }

// Cells covered by a node whose children sit `levels_below` levels down, or
// UINT64_MAX when that does not fit.
constexpr std::uint64_t block_cells(unsigned levels_below) noexcept {
    return 2 * levels_below >= 64 ? ~std::uint64_t{0} : std::uint64_t{1} << (2 * levels_below);
}

} // namespace detail

template <bool Ones>
class BasicK2Tree {
public:
    static constexpr unsigned k = 2;
    static constexpr std::string_view magic = Ones ? "K2O1" : "K2T1";

    BasicK2Tree() = default;

    static BasicK2Tree build(const PlainRelation& r) {
        BasicK2Tree t;
        t.n_ = r.n();
        t.height_ = 2;
        while ((std::uint64_t{1} << t.height_) < r.n())
            ++t.height_;
        t.n_padded_ = std::uint64_t{1} << t.height_;

        std::vector<std::uint64_t> keys;
        keys.reserve(r.pair_count());
        for (NodeId x = 0; x < r.n(); ++x)
            for (auto y : r.row(x))
                keys.push_back(detail::zorder_key(x, y));
        std::sort(keys.begin(), keys.end());

        const unsigned h = t.height_;
        BitVector tbits, lbits, utree, uleaf;
        for (unsigned level = 1; level <= h; ++level) {
            BitVector& dest = level < h ? tbits : lbits;
            BitVector& udest = level < h ? utree : uleaf;
            const unsigned parent_shift = 2 * (h - level + 1);
            const unsigned child_shift = 2 * (h - level);
            const std::uint64_t child_full = detail::block_cells(h - level);
            const std::uint64_t parent_full = detail::block_cells(h - level + 1);

            if (keys.empty() && level == 1) {
                dest.append_bits(0, 4);
                if constexpr (Ones)
                    udest.append_bits(0, 4);
                continue;
            }
            std::size_t i = 0;
            while (i < keys.size()) {
                const std::uint64_t prefix = parent_shift >= 64 ? 0 : keys[i] >> parent_shift;
                std::array<std::uint64_t, 4> counts{};
                std::size_t j = i;
                while (j < keys.size() && (parent_shift >= 64 ? 0 : keys[j] >> parent_shift) == prefix) {
                    ++counts[(keys[j] >> child_shift) & 3];
                    ++j;
                }
                const std::uint64_t total = j - i;
                i = j;
                bool expanded = level == 1;
                if (!expanded)
                    expanded = Ones ? total < parent_full : true;
                if (!expanded)
                    continue;
                for (auto c : counts) {
                    if constexpr (Ones) {
                        bool mixed = level < h ? (c > 0 && c < child_full) : c > 0;
                        dest.push_back(mixed);
                        if (!mixed)
                            udest.push_back(level < h && c == child_full);
                    } else {
                        dest.push_back(c > 0);
                    }
                }
            }
        }
        t.t_ = RankBitVector(std::move(tbits));
        t.l_ = RankBitVector(std::move(lbits));
        if constexpr (Ones) {
            utree.append(uleaf);
            t.u_ = RankBitVector(std::move(utree));
        }
        t.index_levels();
        return t;
    }

    NodeId n() const noexcept { return n_; }
    std::uint64_t n_padded() const noexcept { return n_padded_; }
    unsigned height() const noexcept { return height_; }
    const RankBitVector& tree_bits() const noexcept { return t_; }
    const RankBitVector& leaf_bits() const noexcept { return l_; }
    const RankBitVector& uniform_bits() const noexcept { return u_; }

    // Bits stored at level `level` (1-based).
    BitVector level_bits(unsigned level) const {
        BitVector out;
        for (auto p = level_start_[level - 1]; p < level_start_[level]; ++p)
            out.push_back(bit(p));
        return out;
    }

    std::uint64_t level_start(unsigned level) const noexcept { return level_start_[level - 1]; }

    bool is_related(NodeId x, NodeId y) const {
        check_node(x, n_, "row");
        check_node(y, n_, "column");
        std::uint64_t first_child = 0;
        std::uint64_t side = n_padded_;
        while (true) {
            side >>= 1;
            const std::uint64_t p = first_child + 2 * (x >= side) + (y >= side);
            x %= side;
            y %= side;
            if (side == 1)
                return l_[p - t_.size()];
            if (!t_[p])
                return uniform_ones(p);
            first_child = children_of(p);
        }
    }

    std::vector<NodeId> successors(NodeId x) const {
        check_node(x, n_, "row");
        std::vector<NodeId> out;
        successors_rec(x, 0, n_padded_, 0, out);
        return out;
    }

    std::vector<NodeId> predecessors(NodeId y) const {
        check_node(y, n_, "column");
        std::vector<NodeId> out;
        predecessors_rec(y, 0, n_padded_, 0, out);
        return out;
    }

    std::vector<Pair> range_neighborhood(const RangeQuery& q) const {
        q.validate(n_);
        std::vector<Pair> out;
        range_rec(q, 0, 0, n_padded_, 0, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    PlainRelation decode() const {
        std::vector<Pair> pairs;
        if (n_ > 0)
            range_rec({0, 0, n_ - 1, n_ - 1}, 0, 0, n_padded_, 0, pairs);
        return PlainRelation::from_pairs(n_, std::move(pairs));
    }

    // Header (magic, n, n_padded, height) plus bitmap payloads rounded up to
    // bytes. Rank directories are not counted.
    std::uint64_t size_in_bytes() const noexcept {
        std::uint64_t bytes = 4 + 4 + 4 + 1 + t_.bits().payload_bytes() + l_.bits().payload_bytes();
        if constexpr (Ones)
            bytes += u_.bits().payload_bytes();
        return bytes;
    }

    std::string serialize() const {
        io::ByteWriter out;
        out.put_bytes(magic);
        out.put_u32(n_);
        out.put_u32(static_cast<std::uint32_t>(n_padded_));
        out.put_u8(static_cast<std::uint8_t>(height_));
        t_.serialize(out);
        l_.serialize(out);
        if constexpr (Ones)
            u_.serialize(out);
        return out.release();
    }

    static BasicK2Tree deserialize(std::string_view bytes) {
        io::ByteReader in(bytes);
        in.expect_magic(magic);
        BasicK2Tree t;
        t.n_ = in.get_u32("n");
        t.n_padded_ = in.get_u32("n_padded");
        t.height_ = in.get_u8("height");
        if (t.height_ < 2 || t.height_ > 31 || t.n_padded_ != (std::uint64_t{1} << t.height_) ||
            t.n_padded_ < t.n_ || (t.height_ > 2 && (t.n_padded_ >> 1) >= t.n_))
            throw FormatError("inconsistent k2-tree dimensions");
        t.t_ = RankBitVector::deserialize(in);
        t.l_ = RankBitVector::deserialize(in);
        if constexpr (Ones)
            t.u_ = RankBitVector::deserialize(in);
        in.expect_end("k2-tree");
        t.index_levels();
        if (t.level_start_[t.height_ - 1] != t.t_.size() || t.level_start_[t.height_] != t.t_.size() + t.l_.size())
            throw FormatError("k2-tree level sizes do not match the stored bitmaps");
        if constexpr (Ones) {
            if (t.u_.size() != (t.t_.size() - t.t_.count_ones()) + (t.l_.size() - t.l_.count_ones()))
                throw FormatError("k2-tree1 uniform bitmap length mismatch");
        }
        return t;
    }

    friend bool operator==(const BasicK2Tree& a, const BasicK2Tree& b) noexcept {
        return a.n_ == b.n_ && a.height_ == b.height_ && a.t_ == b.t_ && a.l_ == b.l_ && a.u_ == b.u_;
    }

private:
    template <bool>
    friend class K2SetOperation;

    bool bit(std::uint64_t p) const noexcept { return p < t_.size() ? t_[p] : l_[p - t_.size()]; }

    std::uint64_t children_of(std::uint64_t p) const noexcept { return t_.rank1_unchecked(p + 1) * 4; }

    // Value of the uniform block at position p (a 0 bit).
    bool uniform_ones(std::uint64_t p) const noexcept {
        if constexpr (!Ones) {
            return false;
        } else {
            std::uint64_t z = p < t_.size() ? t_.rank0_unchecked(p)
                                            : (t_.size() - t_.count_ones()) + l_.rank0_unchecked(p - t_.size());
            return u_[z];
        }
    }

    // Recomputes the level boundaries from T. Unvalidated input may produce
    // boundaries past the bitmaps; deserialize() checks them.
    void index_levels() {
        level_start_.assign(height_ + 1, 0);
        std::uint64_t size = 4;
        for (unsigned level = 1; level <= height_; ++level) {
            level_start_[level] = level_start_[level - 1] + size;
            if (level < height_) {
                auto begin = std::min(level_start_[level - 1], t_.size());
                auto end = std::min(level_start_[level], t_.size());
                size = 4 * (t_.rank1_unchecked(end) - t_.rank1_unchecked(begin));
            }
        }
    }

    void emit_block(NodeId row0, NodeId col0, std::uint64_t side, const RangeQuery& q, std::vector<Pair>& out) const {
        std::uint64_t x_end = std::min<std::uint64_t>(row0 + side - 1, q.x2);
        std::uint64_t y_end = std::min<std::uint64_t>(col0 + side - 1, q.y2);
        for (std::uint64_t x = std::max<std::uint64_t>(row0, q.x1); x <= x_end; ++x)
            for (std::uint64_t y = std::max<std::uint64_t>(col0, q.y1); y <= y_end; ++y)
                out.push_back({static_cast<NodeId>(x), static_cast<NodeId>(y)});
    }

    void successors_rec(std::uint64_t x, std::uint64_t col0, std::uint64_t side, std::uint64_t first_child,
                        std::vector<NodeId>& out) const {
        const std::uint64_t half = side >> 1;
        const std::uint64_t row_quadrant = x >= half;
        x %= half;
        for (std::uint64_t cq = 0; cq < 2; ++cq) {
            const std::uint64_t col = col0 + cq * half;
            if (col >= n_)
                break;
            const std::uint64_t p = first_child + 2 * row_quadrant + cq;
            if (half == 1) {
                if (l_[p - t_.size()])
                    out.push_back(static_cast<NodeId>(col));
            } else if (t_[p]) {
                successors_rec(x, col, half, children_of(p), out);
            } else if (uniform_ones(p)) {
                for (std::uint64_t y = col; y < std::min<std::uint64_t>(col + half, n_); ++y)
                    out.push_back(static_cast<NodeId>(y));
            }
        }
    }

    void predecessors_rec(std::uint64_t y, std::uint64_t row0, std::uint64_t side, std::uint64_t first_child,
                          std::vector<NodeId>& out) const {
        const std::uint64_t half = side >> 1;
        const std::uint64_t col_quadrant = y >= half;
        y %= half;
        for (std::uint64_t rq = 0; rq < 2; ++rq) {
            const std::uint64_t row = row0 + rq * half;
            if (row >= n_)
                break;
            const std::uint64_t p = first_child + 2 * rq + col_quadrant;
            if (half == 1) {
                if (l_[p - t_.size()])
                    out.push_back(static_cast<NodeId>(row));
            } else if (t_[p]) {
                predecessors_rec(y, row, half, children_of(p), out);
            } else if (uniform_ones(p)) {
                for (std::uint64_t x = row; x < std::min<std::uint64_t>(row + half, n_); ++x)
                    out.push_back(static_cast<NodeId>(x));
            }
        }
    }

    void range_rec(const RangeQuery& q, std::uint64_t row0, std::uint64_t col0, std::uint64_t side,
                   std::uint64_t first_child, std::vector<Pair>& out) const {
        const std::uint64_t half = side >> 1;
        for (std::uint64_t quad = 0; quad < 4; ++quad) {
            const std::uint64_t r = row0 + (quad >> 1) * half;
            const std::uint64_t c = col0 + (quad & 1) * half;
            if (r > q.x2 || r + half - 1 < q.x1 || c > q.y2 || c + half - 1 < q.y1)
                continue;
            const std::uint64_t p = first_child + quad;
            if (half == 1) {
                if (l_[p - t_.size()])
                    out.push_back({static_cast<NodeId>(r), static_cast<NodeId>(c)});
            } else if (t_[p]) {
                range_rec(q, r, c, half, children_of(p), out);
            } else if (uniform_ones(p)) {
                emit_block(static_cast<NodeId>(r), static_cast<NodeId>(c), half, q, out);
            }
        }
    }

    NodeId n_ = 0;
    std::uint64_t n_padded_ = 4;
    unsigned height_ = 2;
    RankBitVector t_;
    RankBitVector l_;
    RankBitVector u_;
    // level_start_[j - 1] is the first position of level j in T:L.
    std::vector<std::uint64_t> level_start_;
};

using K2Tree = BasicK2Tree<false>;
using K2TreeOnes = BasicK2Tree<true>;

// Set operations computed on the bitmaps of both operands.
//
// Each operand is read through one cursor per level: a depth-first walk
// visits the nodes of any level left to right, so every level bitmap is
// consumed sequentially and no rank calls are needed. Output nodes are
// appended to per-level buffers the same way. A node whose result turns out
// uniform emits nothing, which keeps the output identical to a fresh build.
template <bool Ones>
class K2SetOperation {
public:
    using Tree = BasicK2Tree<Ones>;

    static Tree apply(SetOp op, const Tree& a, const Tree& b) {
        check_same_size(a.n(), b.n());
        if constexpr (!Ones) {
            if (op == SetOp::union_)
                return breadth_first_union(a, b);
        }
        K2SetOperation engine(op, a, b);
        engine.visit(0, State::mixed, State::mixed, true);
        return engine.finish();
    }

private:
    enum class State : std::uint8_t { zero, one, mixed };

    struct Cursor {
        const Tree* tree;
        std::vector<std::uint64_t> pos;  // per level, next unread position
        std::vector<std::uint64_t> upos; // per level, next unread U flag

        explicit Cursor(const Tree& t) : tree(&t), pos(t.height() + 1), upos(t.height() + 1) {
            const auto& tb = t.tree_bits();
            for (unsigned level = 1; level <= t.height(); ++level) {
                pos[level] = t.level_start(level);
                upos[level] = level < t.height() ? tb.rank0_unchecked(pos[level]) : tb.size() - tb.count_ones();
            }
        }

        State read(unsigned level) {
            const bool last = level == tree->height();
            const bool bit = tree->bit(pos[level]++);
            if (bit)
                return last ? State::one : State::mixed;
            if constexpr (Ones)
                return tree->uniform_bits()[upos[level]++] ? State::one : State::zero;
            return State::zero;
        }

        void skip(unsigned depth) {
            for (int q = 0; q < 4; ++q)
                if (read(depth + 1) == State::mixed)
                    skip(depth + 1);
        }
    };

    K2SetOperation(SetOp op, const Tree& a, const Tree& b)
        : op_(op), height_(a.height()), a_(a), b_(b), bits_(height_ + 1), ubits_(height_ + 1), n_(a.n()) {}

    bool cell(bool x, bool y) const noexcept {
        switch (op_) {
        case SetOp::union_: return x || y;
        case SetOp::intersection: return x && y;
        case SetOp::difference: return x && !y;
        case SetOp::symmetric_difference: return x != y;
        }
        return false;
    }

    static State uniform(bool ones) noexcept { return ones ? State::one : State::zero; }

    // Result fixed without looking at the mixed operand(s).
    bool determined(State a, State b, State& result) const noexcept {
        switch (op_) {
        case SetOp::union_:
            if (a == State::one || b == State::one)
                return result = State::one, true;
            break;
        case SetOp::intersection:
            if (a == State::zero || b == State::zero)
                return result = State::zero, true;
            break;
        case SetOp::difference:
            if (a == State::zero || b == State::one)
                return result = State::zero, true;
            break;
        case SetOp::symmetric_difference: break;
        }
        return false;
    }

    // Result state of one node at `depth` given the operands' states there.
    State combine(unsigned depth, State a, State b) {
        if (depth == height_ || (a != State::mixed && b != State::mixed))
            return uniform(cell(a == State::one, b == State::one));
        State result;
        if (determined(a, b, result)) {
            if (a == State::mixed)
                a_.skip(depth);
            if (b == State::mixed)
                b_.skip(depth);
            return result;
        }
        return visit(depth, a, b, false);
    }

    State visit(unsigned depth, State a, State b, bool root) {
        const unsigned level = depth + 1;
        std::array<State, 4> ca, cb, out;
        for (int q = 0; q < 4; ++q)
            ca[q] = a == State::mixed ? a_.read(level) : a;
        for (int q = 0; q < 4; ++q)
            cb[q] = b == State::mixed ? b_.read(level) : b;
        for (int q = 0; q < 4; ++q)
            out[q] = combine(level, ca[q], cb[q]);

        if (!root) {
            auto all = [&](State s) { return std::all_of(out.begin(), out.end(), [s](State v) { return v == s; }); };
            if (all(State::zero))
                return State::zero;
            if (Ones && all(State::one))
                return State::one;
        }
        const bool last = level == height_;
        for (auto s : out) {
            const bool bit = last ? s == State::one : s == State::mixed;
            bits_[level].push_back(bit);
            if (Ones && !bit)
                ubits_[level].push_back(s == State::one);
        }
        return State::mixed;
    }

    Tree finish() {
        BitVector tbits, ubits;
        for (unsigned level = 1; level < height_; ++level) {
            tbits.append(bits_[level]);
            ubits.append(ubits_[level]);
        }
        ubits.append(ubits_[height_]);
        Tree t;
        t.n_ = n_;
        t.height_ = height_;
        t.n_padded_ = std::uint64_t{1} << height_;
        t.t_ = RankBitVector(std::move(tbits));
        t.l_ = RankBitVector(std::move(bits_[height_]));
        if constexpr (Ones)
            t.u_ = RankBitVector(std::move(ubits));
        t.index_levels();
        return t;
    }

    // Plain k2-tree union never collapses a node, so a level-by-level merge
    // suffices: each queued pair says which operands have the node.
    static Tree breadth_first_union(const Tree& a, const Tree& b) {
        const unsigned h = a.height();
        std::vector<std::pair<bool, bool>> queue{{true, true}}, next;
        std::uint64_t pa = 0, pb = 0;
        std::vector<BitVector> levels(h + 1);
        for (unsigned level = 1; level <= h; ++level) {
            next.clear();
            for (auto [fa, fb] : queue) {
                for (int q = 0; q < 4; ++q) {
                    const bool ba = fa && a.bit(pa++);
                    const bool bb = fb && b.bit(pb++);
                    levels[level].push_back(ba || bb);
                    if ((ba || bb) && level < h)
                        next.emplace_back(ba, bb);
                }
            }
            std::swap(queue, next);
        }
        BitVector tbits;
        for (unsigned level = 1; level < h; ++level)
            tbits.append(levels[level]);
        Tree t;
        t.n_ = a.n();
        t.height_ = h;
        t.n_padded_ = std::uint64_t{1} << h;
        t.t_ = RankBitVector(std::move(tbits));
        t.l_ = RankBitVector(std::move(levels[h]));
        t.index_levels();
        return t;
    }

    SetOp op_;
    unsigned height_;
    Cursor a_, b_;
    std::vector<BitVector> bits_;
    std::vector<BitVector> ubits_;
    NodeId n_;
};

inline K2Tree set_operation(SetOp op, const K2Tree& a, const K2Tree& b) {
    return K2SetOperation<false>::apply(op, a, b);
}

inline K2TreeOnes set_operation(SetOp op, const K2TreeOnes& a, const K2TreeOnes& b) {
    return K2SetOperation<true>::apply(op, a, b);
}

} // namespace brel
