#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dplb/errors.hpp"

namespace dplb {

// Splittable counter-based generator (SplitMix64 core). State is a fixed key
// plus a counter, so the j-th draw of a stream is a pure function of
// (key, j): generation loops stay bit-identical no matter how work is split
// across threads, as long as each unit of work owns its own substream.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) noexcept : key_(mix(seed ^ kSeedTweak)) {}

    // Independent child stream; derivation ignores the parent's position.
    SplitRng substream(std::uint64_t stream_id) const noexcept {
        return SplitRng(RawKey{}, mix(key_ ^ mix(stream_id + kGamma)));
    }

    std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kGamma); }

    // Uniform in [0,1), 53-bit mantissa.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) noexcept { return next_double() < p; }

    // Unbiased integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw ConfigError("SplitRng::below: bound must be positive");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    double exponential() noexcept { return -std::log(1.0 - next_double()); }

    // Box-Muller, one variate per call so the draw count stays predictable.
    double normal(double mean, double stddev) noexcept {
        const double u1 = 1.0 - next_double();  // (0,1]
        const double u2 = next_double();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    // Difference of two exponentials; avoids the log(0) edge of the inverse CDF.
    double laplace(double scale) noexcept { return scale * (exponential() - exponential()); }

    // In-place Fisher-Yates.
    template <typename Container>
    void shuffle(Container& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    struct RawKey {};
    SplitRng(RawKey, std::uint64_t key) noexcept : key_(key) {}

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kSeedTweak = 0x582F1D7A2C9B4E6FULL;

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace dplb
