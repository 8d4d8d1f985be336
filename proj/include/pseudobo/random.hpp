#pragma once

#include <cstdint>
#include <random>

namespace pseudobo {

namespace detail {
inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Purpose tags for deterministic substreams hanging off one root seed.
enum class Stream : std::uint64_t {
    init_design = 1,
    candidates = 2,
    prior_fields = 3,
    bootstrap = 4,
    forcing = 5,
    random_search = 6,
    calibration_data = 7,
    trust_region = 8,
};

/// Seeded 64-bit generator with platform-independent uniform draws.
///
/// std::uniform_real_distribution is implementation defined, so draws are
/// built from raw engine output to keep traces identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Child generator for (purpose, index). Pure function of the inputs.
    static Rng substream(std::uint64_t root, Stream purpose, std::uint64_t index = 0) {
        std::uint64_t h = detail::splitmix64(root);
        h = detail::splitmix64(h ^ static_cast<std::uint64_t>(purpose));
        h = detail::splitmix64(h ^ index);
        return Rng(h);
    }

    std::uint64_t next_u64() { return engine_(); }
    std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pseudobo
