#include "coevo/rng.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coevo {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed) >> 32)};
    engine_.seed(seq);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index, std::uint64_t sub_index) {
    return stream(splitmix64(seed ^ splitmix64(index)), sub_index);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
    if (!(rate > 0.0)) {
        throw std::invalid_argument("exponential draw requires a positive rate");
    }
    return -std::log(uniform_open_zero()) / rate;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below requires n > 0");
    }
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

} // namespace coevo
