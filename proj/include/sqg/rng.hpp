// Counter-based Gaussian noise keyed by (seed, stream, step, slot), so
// Brownian increments are reproducible and independent of evaluation order
// or thread layout. Philox4x32-10 core.

#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <utility>

namespace sqg {

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::uint32_t h0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t l0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t h1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t l1 = static_cast<std::uint32_t>(p1);
        ctr = {h1 ^ ctr[1] ^ key[0], l1, h0 ^ ctr[3] ^ key[1], l0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline double u01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    // 53-bit mantissa in (0,1); never returns 0.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

}  // namespace detail

// Purpose tags keep independent noise roles on disjoint counters.
enum class RngPurpose : std::uint32_t {
    SdeNoise = 0,
    InitialCondition = 1,
    Auxiliary = 2,
};

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

    // Two independent standard normals for (step, slot).
    std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t slot,
                                          RngPurpose purpose) const {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
            (static_cast<std::uint32_t>(purpose) << 28) | (slot & 0x0FFFFFFFu), stream_};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
        const auto r = detail::philox4x32(ctr, key);
        const double u1 = detail::u01(r[0], r[1]);
        const double u2 = detail::u01(r[2], r[3]);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        return {rad * std::cos(2.0 * M_PI * u2), rad * std::sin(2.0 * M_PI * u2)};
    }

    std::uint32_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint32_t stream_;
};

}  // namespace sqg
