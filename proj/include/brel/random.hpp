#pragma once

// Reproducible randomness. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; bounded draws and shuffles are done
// here rather than through std distributions, whose algorithms vary across
// standard libraries.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace brel {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, bound), bound > 0, by rejection of the biased tail.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            std::uint64_t r = engine_();
            if (r >= threshold)
                return r % bound;
        }
    }

    // Fisher-Yates over the whole range.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    // Moves a uniform sample of `count` elements to the front of v.
    template <typename T>
    void partial_shuffle(std::vector<T>& v, std::size_t count) {
        for (std::size_t i = 0; i < count && i + 1 < v.size(); ++i)
            std::swap(v[i], v[i + below(v.size() - i)]);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace brel
