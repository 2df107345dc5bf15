#pragma once

// Little-endian byte buffers used by every serialized format.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "brel/error.hpp"

namespace brel::io {

class ByteWriter {
public:
    void put_bytes(std::string_view bytes) { buf_.append(bytes); }

    template <typename T>
    void put(T value) {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }

    void put_u8(std::uint8_t v) { put(v); }
    void put_u16(std::uint16_t v) { put(v); }
    void put_u32(std::uint32_t v) { put(v); }
    void put_u64(std::uint64_t v) { put(v); }

    const std::string& bytes() const noexcept { return buf_; }
    std::string release() noexcept { return std::move(buf_); }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }
    bool at_end() const noexcept { return pos_ == data_.size(); }

    std::string_view take(std::size_t count, const char* what) {
        if (count > remaining())
            throw FormatError(std::string("truncated input while reading ") + what);
        auto out = data_.substr(pos_, count);
        pos_ += count;
        return out;
    }

    template <typename T>
    T get(const char* what) {
        static_assert(std::is_unsigned_v<T>);
        auto raw = take(sizeof(T), what);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            value |= static_cast<T>(static_cast<unsigned char>(raw[i])) << (8 * i);
        return value;
    }

    std::uint8_t get_u8(const char* what) { return get<std::uint8_t>(what); }
    std::uint16_t get_u16(const char* what) { return get<std::uint16_t>(what); }
    std::uint32_t get_u32(const char* what) { return get<std::uint32_t>(what); }
    std::uint64_t get_u64(const char* what) { return get<std::uint64_t>(what); }

    void expect_magic(std::string_view magic) {
        if (take(magic.size(), "magic") != magic)
            throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
    }

    void expect_end(const char* what) const {
        if (!at_end())
            throw FormatError(std::string("trailing bytes after ") + what);
    }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("short write to " + path);
}

} // namespace brel::io
