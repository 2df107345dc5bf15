#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brel/error.hpp"
#include "brel/io.hpp"

namespace brel {

using NodeId = std::uint32_t;

struct Pair {
    NodeId x = 0;
    NodeId y = 0;

    friend auto operator<=>(const Pair&, const Pair&) = default;
};

// Closed rectangle [x1, x2] x [y1, y2].
struct RangeQuery {
    NodeId x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    void validate(NodeId n) const {
        if (x1 > x2 || y1 > y2)
            throw ArgumentError("range query corners out of order");
        if (x2 >= n || y2 >= n)
            throw ArgumentError("range query exceeds relation size " + std::to_string(n));
    }

    friend bool operator==(const RangeQuery&, const RangeQuery&) = default;
};

enum class SetOp { union_, intersection, difference, symmetric_difference };

inline constexpr SetOp all_set_ops[] = {SetOp::union_, SetOp::intersection, SetOp::difference,
                                        SetOp::symmetric_difference};

constexpr std::string_view to_string(SetOp op) noexcept {
    switch (op) {
    case SetOp::union_: return "union";
    case SetOp::intersection: return "inter";
    case SetOp::difference: return "diff";
    case SetOp::symmetric_difference: return "symdiff";
    }
    return "?";
}

inline void check_node(NodeId v, NodeId n, const char* what) {
    if (v >= n)
        throw ArgumentError(std::string(what) + " " + std::to_string(v) + " out of range for n=" + std::to_string(n));
}

// Explicit square binary relation over [0,n) x [0,n), stored row-compressed.
// This is the reference every compressed structure is checked against.
class PlainRelation {
public:
    // Appends rows in order; validates each row as it arrives.
    class Builder {
    public:
        explicit Builder(NodeId n) : n_(n) {
            offsets_.reserve(static_cast<std::size_t>(n) + 1);
            offsets_.push_back(0);
        }

        void add_row(std::span<const NodeId> row) {
            if (offsets_.size() > n_)
                throw ArgumentError("too many rows for n=" + std::to_string(n_));
            auto index = offsets_.size() - 1;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (row[i] >= n_)
                    throw ArgumentError("row " + std::to_string(index) + ": column " + std::to_string(row[i]) +
                                        " out of range");
                if (i > 0 && row[i] <= row[i - 1])
                    throw ArgumentError("row " + std::to_string(index) + " is not strictly increasing");
            }
            cols_.insert(cols_.end(), row.begin(), row.end());
            offsets_.push_back(cols_.size());
        }

        // Row contents already known to be valid (produced by a merge).
        void add_row_unchecked(std::span<const NodeId> row) {
            cols_.insert(cols_.end(), row.begin(), row.end());
            offsets_.push_back(cols_.size());
        }

        PlainRelation finish() && {
            while (offsets_.size() <= n_)
                offsets_.push_back(cols_.size());
            PlainRelation r;
            r.n_ = n_;
            r.offsets_ = std::move(offsets_);
            r.cols_ = std::move(cols_);
            return r;
        }

    private:
        NodeId n_;
        std::vector<std::uint64_t> offsets_;
        std::vector<NodeId> cols_;
    };

    PlainRelation() : offsets_{0} {}
    explicit PlainRelation(NodeId n) : n_(n), offsets_(static_cast<std::size_t>(n) + 1, 0) {}

    // Pairs may arrive in any order; duplicates are rejected.
    static PlainRelation from_pairs(NodeId n, std::vector<Pair> pairs) {
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (pairs[i].x >= n || pairs[i].y >= n)
                throw ArgumentError("pair (" + std::to_string(pairs[i].x) + "," + std::to_string(pairs[i].y) +
                                    ") out of range for n=" + std::to_string(n));
            if (i > 0 && pairs[i] == pairs[i - 1])
                throw ArgumentError("duplicate pair (" + std::to_string(pairs[i].x) + "," +
                                    std::to_string(pairs[i].y) + ")");
        }
        PlainRelation r(n);
        r.cols_.reserve(pairs.size());
        std::size_t i = 0;
        for (NodeId x = 0; x < n; ++x) {
            while (i < pairs.size() && pairs[i].x == x)
                r.cols_.push_back(pairs[i++].y);
            r.offsets_[x + 1] = r.cols_.size();
        }
        return r;
    }

    static PlainRelation full(NodeId n) {
        Builder b(n);
        std::vector<NodeId> row(n);
        for (NodeId y = 0; y < n; ++y)
            row[y] = y;
        for (NodeId x = 0; x < n; ++x)
            b.add_row_unchecked(row);
        return std::move(b).finish();
    }

    NodeId n() const noexcept { return n_; }
    std::uint64_t pair_count() const noexcept { return cols_.size(); }
    bool empty() const noexcept { return cols_.empty(); }

    std::span<const NodeId> row(NodeId x) const noexcept {
        return {cols_.data() + offsets_[x], cols_.data() + offsets_[x + 1]};
    }

    std::span<const std::uint64_t> offsets() const noexcept { return offsets_; }

    // The idx-th pair in (x, y) order.
    Pair pair_at(std::uint64_t idx) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), idx);
        auto x = static_cast<NodeId>(std::distance(offsets_.begin(), it) - 1);
        return {x, cols_[idx]};
    }

    std::vector<Pair> pairs() const {
        std::vector<Pair> out;
        out.reserve(cols_.size());
        for (NodeId x = 0; x < n_; ++x)
            for (auto y : row(x))
                out.push_back({x, y});
        return out;
    }

    bool is_related(NodeId x, NodeId y) const {
        check_node(x, n_, "row");
        check_node(y, n_, "column");
        auto r = row(x);
        return std::binary_search(r.begin(), r.end(), y);
    }

    std::vector<NodeId> successors(NodeId x) const {
        check_node(x, n_, "row");
        auto r = row(x);
        return {r.begin(), r.end()};
    }

    std::vector<NodeId> predecessors(NodeId y) const {
        check_node(y, n_, "column");
        std::vector<NodeId> out;
        for (NodeId x = 0; x < n_; ++x) {
            auto r = row(x);
            if (std::binary_search(r.begin(), r.end(), y))
                out.push_back(x);
        }
        return out;
    }

    std::vector<Pair> range_neighborhood(const RangeQuery& q) const {
        q.validate(n_);
        std::vector<Pair> out;
        for (NodeId x = q.x1; x <= q.x2; ++x) {
            auto r = row(x);
            auto lo = std::lower_bound(r.begin(), r.end(), q.y1);
            auto hi = std::upper_bound(lo, r.end(), q.y2);
            for (auto it = lo; it != hi; ++it)
                out.push_back({x, *it});
        }
        return out;
    }

    PlainRelation decode() const { return *this; }

    // BRADJ1 payload size in bytes.
    std::uint64_t size_in_bytes() const noexcept { return 6 + 4 + 4 * std::uint64_t{n_} + 4 * pair_count(); }

    friend bool operator==(const PlainRelation& a, const PlainRelation& b) noexcept {
        return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.cols_ == b.cols_;
    }

private:
    NodeId n_ = 0;
    std::vector<std::uint64_t> offsets_;
    std::vector<NodeId> cols_;
};

// Merges two sorted id lists according to `op`.
template <typename OutIt>
OutIt merge_rows(SetOp op, std::span<const NodeId> a, std::span<const NodeId> b, OutIt out) {
    switch (op) {
    case SetOp::union_: return std::set_union(a.begin(), a.end(), b.begin(), b.end(), out);
    case SetOp::intersection: return std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), out);
    case SetOp::difference: return std::set_difference(a.begin(), a.end(), b.begin(), b.end(), out);
    case SetOp::symmetric_difference:
        return std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), out);
    }
    return out;
}

inline void check_same_size(NodeId a, NodeId b) {
    if (a != b)
        throw DimensionMismatch("relation sizes differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

inline PlainRelation set_operation(SetOp op, const PlainRelation& a, const PlainRelation& b) {
    check_same_size(a.n(), b.n());
    PlainRelation::Builder out(a.n());
    std::vector<NodeId> row;
    for (NodeId x = 0; x < a.n(); ++x) {
        row.clear();
        merge_rows(op, a.row(x), b.row(x), std::back_inserter(row));
        out.add_row_unchecked(row);
    }
    return std::move(out).finish();
}

// m / n^2.
inline double density(const PlainRelation& r) noexcept {
    if (r.n() == 0)
        return 0.0;
    double n = r.n();
    return static_cast<double>(r.pair_count()) / (n * n);
}

// BRADJ1: "BRADJ1", u32 LE n, then per row u32 LE degree and that many
// strictly increasing u32 LE column ids.
inline constexpr std::string_view adjacency_magic = "BRADJ1";

inline std::string to_bytes(const PlainRelation& r) {
    io::ByteWriter out;
    out.put_bytes(adjacency_magic);
    out.put_u32(r.n());
    for (NodeId x = 0; x < r.n(); ++x) {
        auto row = r.row(x);
        out.put_u32(static_cast<std::uint32_t>(row.size()));
        for (auto y : row)
            out.put_u32(y);
    }
    return out.release();
}

inline PlainRelation relation_from_bytes(std::string_view bytes) {
    io::ByteReader in(bytes);
    in.expect_magic(adjacency_magic);
    NodeId n = in.get_u32("node count");
    if (n > in.remaining() / 4)
        throw FormatError("header declares n=" + std::to_string(n) + " but the body is too short");
    PlainRelation::Builder b(n);
    std::vector<NodeId> row;
    for (NodeId x = 0; x < n; ++x) {
        auto degree = in.get_u32("row degree");
        if (degree > in.remaining() / 4)
            throw FormatError("row " + std::to_string(x) + ": degree " + std::to_string(degree) +
                              " exceeds remaining bytes");
        row.resize(degree);
        for (auto& y : row)
            y = in.get_u32("column id");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] >= n)
                throw FormatError("row " + std::to_string(x) + ": column " + std::to_string(row[i]) +
                                  " out of range");
            if (i > 0 && row[i] <= row[i - 1])
                throw FormatError("row " + std::to_string(x) + ": column ids not strictly increasing");
        }
        b.add_row_unchecked(row);
    }
    in.expect_end("adjacency rows");
    return std::move(b).finish();
}

inline void save(const PlainRelation& r, const std::string& path) { io::write_file(path, to_bytes(r)); }

inline PlainRelation load(const std::string& path) { return relation_from_bytes(io::read_file(path)); }

} // namespace brel
