#pragma once

// Rice-runs adjacency lists.
//
// Row layout: 5-bit Rice parameter k, degree as a byte-group varint (7 data
// bits, high bit = more groups), then the symbols. The first column is
// coded as is. Later columns are coded through their gap g to the previous
// one: a maximal run of r gaps equal to 1 becomes the code for g=1 followed
// by r, every other gap is coded as g-1. Empty rows occupy no bits.
//
// Rice(v, k): v >> k in unary (ones closed by a zero), then the k low bits.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brel/bitvec.hpp"
#include "brel/error.hpp"
#include "brel/io.hpp"
#include "brel/relation.hpp"

namespace brel {

struct RiceSymbol {
    enum Kind { first, gap, run } kind;
    std::uint64_t value; // column, gap, or run length

    friend bool operator==(const RiceSymbol&, const RiceSymbol&) = default;
};

inline std::vector<RiceSymbol> rice_symbols(std::span<const NodeId> row) {
    std::vector<RiceSymbol> out;
    if (row.empty())
        return out;
    out.push_back({RiceSymbol::first, row[0]});
    for (std::size_t i = 1; i < row.size();) {
        std::uint64_t g = row[i] - row[i - 1];
        if (g != 1) {
            out.push_back({RiceSymbol::gap, g});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < row.size() && row[j] - row[j - 1] == 1)
            ++j;
        out.push_back({RiceSymbol::run, j - i});
        i = j;
    }
    return out;
}

namespace detail {

inline constexpr unsigned rice_param_bits = 5;
inline constexpr unsigned rice_max_param = 16;

inline void rice_put(BitVector& out, std::uint64_t v, unsigned k) {
    out.append_ones(v >> k);
    out.push_back(false);
    out.append_bits(v, k);
}

inline void varint_put(BitVector& out, std::uint64_t v) {
    do {
        std::uint64_t group = v & 0x7f;
        v >>= 7;
        if (v)
            group |= 0x80;
        out.append_bits(group, 8);
    } while (v);
}

// The values actually passed to the Rice coder, in stream order.
inline void rice_values(const std::vector<RiceSymbol>& symbols, std::vector<std::uint64_t>& values) {
    values.clear();
    for (const auto& s : symbols) {
        switch (s.kind) {
        case RiceSymbol::first: values.push_back(s.value); break;
        case RiceSymbol::gap: values.push_back(s.value - 1); break;
        case RiceSymbol::run:
            values.push_back(0);
            values.push_back(s.value);
            break;
        }
    }
}

inline unsigned best_rice_param(const std::vector<std::uint64_t>& values) {
    unsigned best = 0;
    std::uint64_t best_bits = ~std::uint64_t{0};
    for (unsigned k = 0; k <= rice_max_param; ++k) {
        std::uint64_t bits = 0;
        for (auto v : values)
            bits += (v >> k) + 1 + k;
        if (bits < best_bits) {
            best_bits = bits;
            best = k;
        }
    }
    return best;
}

// Bounds-checked sequential reader over [pos, end) of a bit vector.
class BitReader {
public:
    BitReader(const BitVector& bits, std::uint64_t pos, std::uint64_t end) : bits_(bits), pos_(pos), end_(end) {}

    std::uint64_t read(unsigned count) {
        need(count);
        auto v = bits_.get_bits(pos_, count);
        pos_ += count;
        return v;
    }

    std::uint64_t read_unary() {
        std::uint64_t q = 0;
        while (true) {
            need(1);
            unsigned avail = static_cast<unsigned>(std::min<std::uint64_t>(64, end_ - pos_));
            std::uint64_t word = bits_.get_bits(pos_, avail);
            unsigned ones = static_cast<unsigned>(std::countr_one(word));
            if (ones < avail) {
                q += ones;
                pos_ += ones + 1;
                return q;
            }
            q += avail;
            pos_ += avail;
        }
    }

    std::uint64_t read_rice(unsigned k) {
        std::uint64_t q = read_unary();
        if (k && q >> (64 - k))
            throw FormatError("Rice quotient overflow");
        return (q << k) | read(k);
    }

    std::uint64_t read_varint() {
        std::uint64_t v = 0;
        for (unsigned shift = 0;; shift += 7) {
            if (shift > 56)
                throw FormatError("varint too long");
            std::uint64_t group = read(8);
            v |= (group & 0x7f) << shift;
            if (!(group & 0x80))
                return v;
        }
    }

    std::uint64_t position() const noexcept { return pos_; }

private:
    void need(std::uint64_t count) const {
        if (end_ - pos_ < count)
            throw FormatError("Rice row truncated");
    }

    const BitVector& bits_;
    std::uint64_t pos_, end_;
};

} // namespace detail

class RiceRunsList {
public:
    RiceRunsList() : offsets_{0} {}

    static RiceRunsList encode(const PlainRelation& r) {
        RiceRunsList l;
        l.n_ = r.n();
        l.offsets_.reserve(static_cast<std::size_t>(r.n()) + 1);
        std::vector<std::uint64_t> values;
        for (NodeId x = 0; x < r.n(); ++x) {
            l.append_row(r.row(x), values);
            l.offsets_.push_back(l.payload_.size());
        }
        return l;
    }

    // Encoding of a single row as it would appear in the payload.
    static BitVector encode_row(std::span<const NodeId> row) {
        RiceRunsList l;
        std::vector<std::uint64_t> values;
        l.append_row(row, values);
        return l.payload_;
    }

    NodeId n() const noexcept { return n_; }
    const BitVector& payload() const noexcept { return payload_; }
    std::uint64_t row_bits(NodeId x) const { return offsets_.at(x + 1) - offsets_.at(x); }

    unsigned row_parameter(NodeId x) const {
        check_node(x, n_, "row");
        if (row_bits(x) == 0)
            throw ArgumentError("row " + std::to_string(x) + " is empty and has no parameter");
        return static_cast<unsigned>(payload_.get_bits(offsets_[x], detail::rice_param_bits));
    }

    std::vector<NodeId> decode_row(NodeId x) const {
        check_node(x, n_, "row");
        std::vector<NodeId> out;
        decode_row_into(x, out);
        return out;
    }

    bool is_related(NodeId x, NodeId y) const {
        check_node(y, n_, "column");
        auto row = decode_row(x);
        return std::binary_search(row.begin(), row.end(), y);
    }

    std::vector<NodeId> successors(NodeId x) const { return decode_row(x); }

    // Every row has to be decoded: the lists are indexed by row only.
    std::vector<NodeId> predecessors(NodeId y) const {
        check_node(y, n_, "column");
        std::vector<NodeId> out, row;
        for (NodeId x = 0; x < n_; ++x) {
            decode_row_into(x, row);
            if (std::binary_search(row.begin(), row.end(), y))
                out.push_back(x);
        }
        return out;
    }

    std::vector<Pair> range_neighborhood(const RangeQuery& q) const {
        q.validate(n_);
        std::vector<Pair> out;
        std::vector<NodeId> row;
        for (NodeId x = q.x1;; ++x) {
            decode_row_into(x, row);
            auto lo = std::lower_bound(row.begin(), row.end(), q.y1);
            auto hi = std::upper_bound(lo, row.end(), q.y2);
            for (auto it = lo; it != hi; ++it)
                out.push_back({x, *it});
            if (x == q.x2)
                break;
        }
        return out;
    }

    PlainRelation decode() const {
        PlainRelation::Builder b(n_);
        std::vector<NodeId> row;
        for (NodeId x = 0; x < n_; ++x) {
            decode_row_into(x, row);
            b.add_row_unchecked(row);
        }
        return std::move(b).finish();
    }

    // n (4) + magic (4) + u64 offsets + payload rounded to bytes.
    std::uint64_t size_in_bytes() const noexcept { return 8 + 8 * offsets_.size() + payload_.payload_bytes(); }

    std::string serialize() const {
        io::ByteWriter out;
        out.put_bytes(magic);
        out.put_u32(n_);
        for (auto o : offsets_)
            out.put_u64(o);
        payload_.serialize(out);
        return out.release();
    }

    static RiceRunsList deserialize(std::string_view bytes) {
        io::ByteReader in(bytes);
        in.expect_magic(magic);
        RiceRunsList l;
        l.n_ = in.get_u32("n");
        if (l.n_ >= in.remaining() / 8)
            throw FormatError("RRUN header declares n=" + std::to_string(l.n_) + " but the body is too short");
        l.offsets_.resize(static_cast<std::size_t>(l.n_) + 1);
        for (auto& o : l.offsets_)
            o = in.get_u64("row offset");
        l.payload_ = BitVector::deserialize(in);
        in.expect_end("RRUN");
        if (l.offsets_.front() != 0 || l.offsets_.back() != l.payload_.size())
            throw FormatError("RRUN offsets do not span the payload");
        std::vector<NodeId> row;
        for (NodeId x = 0; x < l.n_; ++x) {
            if (l.offsets_[x + 1] < l.offsets_[x])
                throw FormatError("RRUN offsets decrease at row " + std::to_string(x));
            l.decode_row_into(x, row);
            if (!l.row_equals(x, encode_row(row)))
                throw FormatError("RRUN row " + std::to_string(x) + " is not canonically encoded");
        }
        return l;
    }

    friend bool operator==(const RiceRunsList& a, const RiceRunsList& b) noexcept {
        return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.payload_ == b.payload_;
    }

    static constexpr std::string_view magic = "RRUN";

private:
    bool row_equals(NodeId x, const BitVector& bits) const {
        if (bits.size() != row_bits(x))
            return false;
        for (std::uint64_t i = 0; i < bits.size(); i += 64) {
            const auto count = static_cast<unsigned>(std::min<std::uint64_t>(64, bits.size() - i));
            if (bits.get_bits(i, count) != payload_.get_bits(offsets_[x] + i, count))
                return false;
        }
        return true;
    }

    void append_row(std::span<const NodeId> row, std::vector<std::uint64_t>& values) {
        if (row.empty())
            return;
        detail::rice_values(rice_symbols(row), values);
        unsigned k = detail::best_rice_param(values);
        payload_.append_bits(k, detail::rice_param_bits);
        detail::varint_put(payload_, row.size());
        for (auto v : values)
            detail::rice_put(payload_, v, k);
    }

    void decode_row_into(NodeId x, std::vector<NodeId>& out) const {
        out.clear();
        const std::uint64_t begin = offsets_[x], end = offsets_[x + 1];
        if (begin == end)
            return;
        auto fail = [&](const char* what) {
            throw FormatError("RRUN row " + std::to_string(x) + ": " + what);
        };
        detail::BitReader in(payload_, begin, end);
        unsigned k = static_cast<unsigned>(in.read(detail::rice_param_bits));
        if (k > detail::rice_max_param)
            fail("Rice parameter out of range");
        std::uint64_t degree = in.read_varint();
        if (degree == 0 || degree > n_)
            fail("degree out of range");
        out.reserve(degree);
        std::uint64_t c = in.read_rice(k);
        if (c >= n_)
            fail("column out of range");
        out.push_back(static_cast<NodeId>(c));
        while (out.size() < degree) {
            std::uint64_t v = in.read_rice(k);
            if (v == 0) {
                std::uint64_t r = in.read_rice(k);
                if (r == 0 || r > degree - out.size() || c + r >= n_)
                    fail("bad run length");
                for (std::uint64_t i = 0; i < r; ++i)
                    out.push_back(static_cast<NodeId>(++c));
            } else {
                c += v + 1;
                if (c >= n_)
                    fail("column out of range");
                out.push_back(static_cast<NodeId>(c));
            }
        }
        if (in.position() != end)
            fail("trailing bits");
    }

    NodeId n_ = 0;
    std::vector<std::uint64_t> offsets_;
    BitVector payload_;
};

inline RiceRunsList set_operation(SetOp op, const RiceRunsList& a, const RiceRunsList& b) {
    check_same_size(a.n(), b.n());
    PlainRelation::Builder out(a.n());
    std::vector<NodeId> ra, rb, row;
    for (NodeId x = 0; x < a.n(); ++x) {
        ra = a.decode_row(x);
        rb = b.decode_row(x);
        row.clear();
        merge_rows(op, ra, rb, std::back_inserter(row));
        out.add_row_unchecked(row);
    }
    return RiceRunsList::encode(std::move(out).finish());
}

} // namespace brel
