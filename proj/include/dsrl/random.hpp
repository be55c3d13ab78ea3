#ifndef DSRL_RANDOM_HPP
#define DSRL_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsrl {

/// SplitMix64 finalizer, used to derive well-separated seeds from small keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Folds a master seed and a list of indices into one seed. Different key
/// tuples give unrelated streams, so trial results never depend on the order
/// in which trials are executed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t h = mix64(master);
    for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
    return h;
}

/// Seeded random stream. The real-valued draws are computed from raw 64-bit
/// output rather than std::uniform_real_distribution, so sequences are the
/// same on every standard library.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    RandomStream(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
        : engine_(derive_seed(master, keys)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform_open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    engine_type engine_;
};

} // namespace dsrl

#endif // DSRL_RANDOM_HPP
