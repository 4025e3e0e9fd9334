// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random stream: every (seed, stream) pair yields an
// independent, reproducible sequence, so snapshots can be rendered in any
// order or in parallel with bit-identical results.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mpct
{

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class CounterRng
{
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull)))
    {
    }

    std::uint64_t next_u64() { return splitmix64(key_ + 0xD1B54A32D192ED03ull * ++counter_); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (no cached second value, so the
    /// stream position depends only on the number of calls).
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace mpct
