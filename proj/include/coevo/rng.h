#pragma once

#include <cstdint>
#include <random>

namespace coevo {

/// Seedable stream generator. Wraps mt19937_64 and draws uniforms and
/// exponentials from raw bits so results do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream for (seed, stream index). Used per replication so
    /// serial and parallel runs see identical draws.
    static Rng stream(std::uint64_t seed, std::uint64_t index);
    static Rng stream(std::uint64_t seed, std::uint64_t index, std::uint64_t sub_index);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1].
    double uniform_open_zero() { return 1.0 - uniform(); }

    double exponential(double rate);

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace coevo
