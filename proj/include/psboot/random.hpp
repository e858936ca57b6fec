#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace psboot {

// Randomness is organised as a tree of independent streams. Every replicate
// (a bootstrap draw, a simulated dataset, a row of a sample) owns one stream
// whose seed is a hash of (parent seed, tag, index). Results therefore do not
// depend on how replicates are scheduled across threads.

enum class StreamTag : std::uint64_t {
    SampleRow = 1,
    Multiplier = 2,
    GaussianDraw = 3,
    Simulation = 4,
    Bootstrap = 5,
    GpPath = 6,
    Counts = 7,
    Reference = 8,
    OuterRep = 9,
    Batch = 10,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of child stream `index` under `tag` of the stream seeded by `parent`.
std::uint64_t stream_seed(std::uint64_t parent, StreamTag tag, std::uint64_t index);

/// xoshiro256++; satisfies UniformRandomBitGenerator and is cheap to seed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t parent, StreamTag tag, std::uint64_t index)
        : Rng(stream_seed(parent, tag, index))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double normal();
    void fill_normal(std::span<double> out);

private:
    std::array<std::uint64_t, 4> s_;
};

/// Standardised noise families (mean 0, variance 1), all sub-exponential.
enum class Noise {
    Gaussian,
    ScaledUniform,         // U[-sqrt(3), sqrt(3)]
    SymmetricExponential,  // Laplace with scale 1/sqrt(2)
};

double draw_noise(Noise noise, Rng& rng);

/// One draw of n^{-1/2} (Z_1 + ... + Z_n) for i.i.d. standardised noise Z.
/// Gaussian and Laplace sums are sampled exactly in O(1); uniform sums by
/// direct summation.
double draw_noise_mean(Noise noise, std::size_t n, Rng& rng);

const char* to_string(Noise noise);
Noise noise_from_string(const std::string& name);

}  // namespace psboot
