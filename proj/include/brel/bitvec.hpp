#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brel/error.hpp"
#include "brel/io.hpp"

namespace brel {

// Growable packed bit sequence. Bit i lives in word i / 64 at bit i % 64.
class BitVector {
public:
    BitVector() = default;

    explicit BitVector(std::uint64_t size, bool value = false)
        : words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0), size_(size) {
        clear_tail();
    }

    static BitVector from_bits(std::span<const int> bits) {
        BitVector v;
        v.reserve(bits.size());
        for (int b : bits)
            v.push_back(b != 0);
        return v;
    }

    // "0111" style literal, spaces ignored. Test convenience.
    static BitVector from_string(std::string_view s) {
        BitVector v;
        for (char c : s) {
            if (c == '0' || c == '1')
                v.push_back(c == '1');
        }
        return v;
    }

    std::uint64_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    void reserve(std::uint64_t bits) { words_.reserve((bits + 63) / 64); }

    void push_back(bool bit) {
        if ((size_ & 63) == 0)
            words_.push_back(0);
        if (bit)
            words_.back() |= std::uint64_t{1} << (size_ & 63);
        ++size_;
    }

    // Appends the low `count` bits of `value`, least significant first.
    void append_bits(std::uint64_t value, unsigned count) {
        if (count == 0)
            return;
        if (count < 64)
            value &= (std::uint64_t{1} << count) - 1;
        unsigned offset = size_ & 63;
        if (offset == 0)
            words_.push_back(0);
        words_.back() |= value << offset;
        if (offset + count > 64) {
            words_.push_back(value >> (64 - offset));
        }
        size_ += count;
    }

    // `count` one bits, then nothing else.
    void append_ones(std::uint64_t count) {
        while (count >= 64) {
            append_bits(~std::uint64_t{0}, 64);
            count -= 64;
        }
        append_bits(~std::uint64_t{0}, static_cast<unsigned>(count));
    }

    void append(const BitVector& other) {
        std::uint64_t full = other.size_ / 64;
        for (std::uint64_t w = 0; w < full; ++w)
            append_bits(other.words_[w], 64);
        if (unsigned rest = other.size_ & 63)
            append_bits(other.words_[full], rest);
    }

    bool operator[](std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1; }

    bool at(std::uint64_t i) const {
        if (i >= size_)
            throw OutOfBounds("bit index " + std::to_string(i) + " >= length " + std::to_string(size_));
        return (*this)[i];
    }

    void set(std::uint64_t i, bool bit) noexcept {
        auto mask = std::uint64_t{1} << (i & 63);
        if (bit)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    // Reads `count` <= 64 bits starting at `pos`, least significant first.
    std::uint64_t get_bits(std::uint64_t pos, unsigned count) const noexcept {
        if (count == 0)
            return 0;
        std::uint64_t w = pos >> 6;
        unsigned offset = pos & 63;
        std::uint64_t value = words_[w] >> offset;
        if (offset + count > 64)
            value |= words_[w + 1] << (64 - offset);
        return count == 64 ? value : value & ((std::uint64_t{1} << count) - 1);
    }

    std::uint64_t count_ones() const noexcept {
        std::uint64_t total = 0;
        for (auto w : words_)
            total += static_cast<std::uint64_t>(std::popcount(w));
        return total;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(size_);
        for (std::uint64_t i = 0; i < size_; ++i)
            s.push_back((*this)[i] ? '1' : '0');
        return s;
    }

    friend bool operator==(const BitVector& a, const BitVector& b) noexcept {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

    // u64 LE bit length, then ceil(L/64) LE words with unused high bits zero.
    void serialize(io::ByteWriter& out) const {
        out.put_u64(size_);
        for (auto w : words_)
            out.put_u64(w);
    }

    static BitVector deserialize(io::ByteReader& in) {
        BitVector v;
        v.size_ = in.get_u64("bit vector length");
        std::uint64_t nwords = v.size_ / 64 + ((v.size_ & 63) != 0);
        if (nwords > in.remaining() / 8)
            throw FormatError("truncated bit vector payload");
        v.words_.resize(nwords);
        for (auto& w : v.words_)
            w = in.get_u64("bit vector word");
        if (v.size_ & 63) {
            auto tail = v.words_.back() >> (v.size_ & 63);
            if (tail != 0)
                throw FormatError("bit vector has nonzero bits past its length");
        }
        return v;
    }

    std::uint64_t payload_bytes() const noexcept { return (size_ + 7) / 8; }

private:
    void clear_tail() noexcept {
        if (size_ & 63)
            words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
    }

    std::vector<std::uint64_t> words_;
    std::uint64_t size_ = 0;
};

// Immutable bit sequence with rank/select support.
//
// The directory keeps one absolute 64-bit count per 512-bit block, block 0
// omitted since its count is always zero. That is 64 / 512 = 12.5% of the
// payload. rank1 adds at most seven word popcounts to a directory lookup;
// select1 binary-searches the directory and then scans one block.
class RankBitVector {
public:
    static constexpr std::uint64_t block_bits = 512;
    static constexpr std::uint64_t words_per_block = block_bits / 64;

    RankBitVector() = default;

    explicit RankBitVector(BitVector bits) : bits_(std::move(bits)) { build_directory(); }

    static RankBitVector from_bits(std::span<const int> bits) { return RankBitVector(BitVector::from_bits(bits)); }

    std::uint64_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    std::uint64_t count_ones() const noexcept { return ones_; }
    const BitVector& bits() const noexcept { return bits_; }

    bool operator[](std::uint64_t i) const noexcept { return bits_[i]; }
    bool access(std::uint64_t i) const { return bits_.at(i); }

    // Number of ones in [0, i). Unchecked.
    std::uint64_t rank1_unchecked(std::uint64_t i) const noexcept {
        if (i >= size())
            return ones_;
        std::uint64_t block = i / block_bits;
        std::uint64_t r = block == 0 ? 0 : blocks_[block - 1];
        auto words = bits_.words();
        std::uint64_t w = block * words_per_block;
        std::uint64_t last = i >> 6;
        for (; w < last; ++w)
            r += static_cast<std::uint64_t>(std::popcount(words[w]));
        if (unsigned rest = i & 63)
            r += static_cast<std::uint64_t>(std::popcount(words[last] & ((std::uint64_t{1} << rest) - 1)));
        return r;
    }

    std::uint64_t rank1(std::uint64_t i) const {
        if (i > size())
            throw OutOfBounds("rank position " + std::to_string(i) + " > length " + std::to_string(size()));
        return rank1_unchecked(i);
    }

    std::uint64_t rank0(std::uint64_t i) const { return i - rank1(i); }
    std::uint64_t rank0_unchecked(std::uint64_t i) const noexcept { return i - rank1_unchecked(i); }

    // Position of the one with rank j (0-based).
    std::uint64_t select1(std::uint64_t j) const {
        if (j >= ones_)
            throw NoSuchOne("select1(" + std::to_string(j) + ") with only " + std::to_string(ones_) + " ones");
        // First block whose cumulative count exceeds j.
        std::uint64_t lo = 0, hi = blocks_.size();
        while (lo < hi) {
            std::uint64_t mid = lo + (hi - lo) / 2;
            if (blocks_[mid] <= j)
                lo = mid + 1;
            else
                hi = mid;
        }
        std::uint64_t block = lo; // ones before block `lo` are <= j
        std::uint64_t seen = block == 0 ? 0 : blocks_[block - 1];
        auto words = bits_.words();
        std::uint64_t w = block * words_per_block;
        for (;; ++w) {
            auto pc = static_cast<std::uint64_t>(std::popcount(words[w]));
            if (seen + pc > j)
                break;
            seen += pc;
        }
        std::uint64_t word = words[w];
        for (std::uint64_t k = j - seen; k > 0; --k)
            word &= word - 1;
        return w * 64 + static_cast<std::uint64_t>(std::countr_zero(word));
    }

    // Bytes of auxiliary rank structure, never serialized.
    std::uint64_t directory_bytes() const noexcept { return blocks_.size() * sizeof(std::uint64_t); }

    void serialize(io::ByteWriter& out) const { bits_.serialize(out); }
    static RankBitVector deserialize(io::ByteReader& in) { return RankBitVector(BitVector::deserialize(in)); }

    friend bool operator==(const RankBitVector& a, const RankBitVector& b) noexcept { return a.bits_ == b.bits_; }

private:
    void build_directory() {
        auto words = bits_.words();
        std::uint64_t nblocks = (words.size() + words_per_block - 1) / words_per_block;
        blocks_.clear();
        blocks_.reserve(nblocks > 0 ? nblocks - 1 : 0);
        std::uint64_t running = 0;
        for (std::uint64_t w = 0; w < words.size(); ++w) {
            if (w > 0 && w % words_per_block == 0)
                blocks_.push_back(running);
            running += static_cast<std::uint64_t>(std::popcount(words[w]));
        }
        ones_ = running;
    }

    BitVector bits_;
    std::vector<std::uint64_t> blocks_; // blocks_[b - 1] = ones before block b
    std::uint64_t ones_ = 0;
};

} // namespace brel
