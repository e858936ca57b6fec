#include "psboot/random.hpp"

#include "psboot/error.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cmath>

namespace psboot {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t parent, StreamTag tag, std::uint64_t index)
{
    std::uint64_t h = splitmix64(parent);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(tag) * 0xd1b54a32d192ed03ULL));
    return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed)
{
    std::uint64_t x = seed;
    for (auto& w : s_) {
        x += 0x9e3779b97f4a7c15ULL;
        w = splitmix64(x);
    }
}

Rng::result_type Rng::operator()()
{
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform()
{
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
    // Boost's normal is a stateless ziggurat: one call consumes a fixed,
    // platform-independent amount of the stream.
    return boost::random::normal_distribution<double>{}(*this);
}

void Rng::fill_normal(std::span<double> out)
{
    boost::random::normal_distribution<double> dist;
    for (double& v : out) v = dist(*this);
}

double draw_noise(Noise noise, Rng& rng)
{
    switch (noise) {
    case Noise::Gaussian:
        return rng.normal();
    case Noise::ScaledUniform:
        return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case Noise::SymmetricExponential: {
        const std::uint64_t bits = rng();
        const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
        const double e = -std::log(u) * M_SQRT1_2;
        return (bits & 1U) ? e : -e;
    }
    }
    return 0.0;
}

double draw_noise_mean(Noise noise, std::size_t n, Rng& rng)
{
    const double root_n = std::sqrt(static_cast<double>(n));
    switch (noise) {
    case Noise::Gaussian:
        return rng.normal();
    case Noise::SymmetricExponential: {
        // A Laplace variable is a difference of two unit exponentials scaled
        // by 1/sqrt(2); a sum of n of them is a difference of two Gamma(n, 1).
        boost::random::gamma_distribution<double> gamma(static_cast<double>(n));
        const double a = gamma(rng);
        const double b = gamma(rng);
        return (a - b) * M_SQRT1_2 / root_n;
    }
    case Noise::ScaledUniform: {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += draw_noise(noise, rng);
        return s / root_n;
    }
    }
    return 0.0;
}

const char* to_string(Noise noise)
{
    switch (noise) {
    case Noise::Gaussian: return "gaussian";
    case Noise::ScaledUniform: return "scaled-uniform";
    case Noise::SymmetricExponential: return "symmetric-exponential";
    }
    return "?";
}

Noise noise_from_string(const std::string& name)
{
    if (name == "gaussian") return Noise::Gaussian;
    if (name == "scaled-uniform") return Noise::ScaledUniform;
    if (name == "symmetric-exponential") return Noise::SymmetricExponential;
    throw ValidationError("unknown noise family '" + name + "'");
}

}  // namespace psboot
