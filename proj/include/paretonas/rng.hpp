#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace paretonas {

/// SplitMix64. Used wherever constants must be reproducible from a seed in
/// another language (the surrogate tables); the recipe is three lines.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

/// Seeded random stream for search and sampling.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Draws are implemented here rather than through <random>
/// distributions so results do not depend on the standard library vendor.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [lo, hi], unbiased (rejection sampling).
    int uniform_int(int lo, int hi);

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call, no caching so the
    /// serialized state is just the engine).
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Independent stream derived from this stream's seed space and a key;
    /// does not advance this stream.
    static RandomStream derive(std::uint64_t seed, std::uint64_t key);

    std::string save_state() const;
    void load_state(const std::string& state);

  private:
    std::mt19937_64 engine_;
};

} // namespace paretonas
