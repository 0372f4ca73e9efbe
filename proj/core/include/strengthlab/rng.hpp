#pragma once

#include <cstdint>
#include <limits>

namespace strengthlab {

__extension__ using uint128 = unsigned __int128;

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the i-th draw of stream (seed, stream) is a pure
/// function of (seed, stream, i), so trials can be split across workers and
/// merged without changing any value. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return at(counter_++); }

    /// Draw at an absolute counter position without advancing.
    result_type at(std::uint64_t counter) const noexcept { return mix64(key_ ^ mix64(counter)); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return to_unit(operator()()); }
    double uniform_at(std::uint64_t counter) const noexcept { return to_unit(at(counter)); }

    /// Unbiased-enough index in [0, n) via 64x64->128 multiply.
    std::uint64_t below(std::uint64_t n) noexcept { return scale(operator()(), n); }

    static constexpr std::uint64_t scale(std::uint64_t bits, std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<uint128>(bits) * n) >> 64);
    }

    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr double to_unit(std::uint64_t bits) noexcept {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace strengthlab
