#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace wlancap {

/// Seedable random stream used by the simulator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The mappings to uniform reals, bounded integers and exponentials
/// are implemented here rather than through <random> distributions, whose
/// algorithms differ between standard libraries. Results are therefore
/// identical on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer on {0, ..., bound - 1}; bound >= 1. Unbiased
    /// (rejection on the top of the 64-bit range).
    std::uint64_t below(std::uint64_t bound);

    /// Exponential with the given rate (> 0).
    double exponential(double rate);

private:
    std::mt19937_64 engine_;
};

/// Independent streams derived from one seed: stream k is seeded through
/// std::seed_seq from (seed low word, seed high word, k).
std::vector<Rng> make_streams(std::uint64_t seed, std::size_t count);

}  // namespace wlancap
