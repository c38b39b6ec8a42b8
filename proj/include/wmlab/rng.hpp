#pragma once

#include <cstdint>
#include <random>

namespace wmlab {

// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Counter-based seed for (master, point, trial). Order-independent, so
// parallel workers reproduce the serial stream exactly.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial = 0);

// Deterministic variate source. All conversions from raw engine output are
// done here (not through std:: distributions) so results are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Uniform on the open interval (0, 1).
    double uniform();
    // Standard normal via Box-Muller.
    double normal();
    // Unit-mean exponential.
    double exponential();
    // Gamma(shape, 1). Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
    double gamma(double shape);
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // +1 or -1 with equal probability.
    double sign();

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wmlab
