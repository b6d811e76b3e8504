#include "wlancap/rng.hpp"

#include <cmath>
#include <limits>

#include "wlancap/error.hpp"

namespace wlancap {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seeded_engine(seed, stream)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw DomainError("Rng::below: bound must be >= 1");
    if (bound == 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

double Rng::exponential(double rate) {
    if (!(rate > 0.0)) throw DomainError("Rng::exponential: rate must be > 0");
    return -std::log1p(-uniform()) / rate;
}

std::vector<Rng> make_streams(std::uint64_t seed, std::size_t count) {
    std::vector<Rng> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.emplace_back(seed, k);
    return out;
}

}  // namespace wlancap
