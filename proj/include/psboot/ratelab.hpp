#pragma once

#include "psboot/model.hpp"
#include "psboot/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace psboot::ratelab {

/// sup_t |F_a(t) - F_b(t)| for the two empirical distribution functions.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// ref_draws independent copies of M = max_j S_{n,j} / sigma_j^tau, each from
/// a fresh size-n sample of the model. Uses S_n = Sigma^{1/2} n^{-1/2} sum_i Z_i,
/// so one draw costs p noise means plus one application of Sigma^{1/2}.
std::vector<double> reference_max_draws(const CovarianceModel& model, double tau, std::size_t n, Noise noise,
                                        std::size_t count, std::uint64_t seed,
                                        const Executor& exec = serial_executor());

/// d_K(L(M), L(M~)) estimated from ref_draws copies of each.
double estimate_dk_gaussian(const CovarianceModel& model, const Eigen::VectorXd& mu, double tau, std::size_t n,
                            Noise noise, std::size_t ref_draws, std::uint64_t seed,
                            const Executor& exec = serial_executor());

struct BootstrapDistance {
    double median = 0.0;
    double q90 = 0.0;
    std::vector<double> all;  // one distance per outer dataset
};

/// d_K(L(M), L(M* | X)) over outer_reps datasets X, each with B bootstrap
/// draws, against one shared reference population of size ref_draws.
BootstrapDistance estimate_dk_bootstrap(const CovarianceModel& model, const Eigen::VectorXd& mu, double tau,
                                        std::size_t n, Noise noise, std::size_t ref_draws, std::size_t outer_reps,
                                        std::size_t B, std::uint64_t seed, const Executor& exec = serial_executor());

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool floored = false;  // some distance was replaced by the floor
};

/// Least squares of log(dk) on log(n); entries below `floor` are raised to it.
RateFit fit_rate(std::span<const double> ns, std::span<const double> dks, double floor);

namespace prule {
struct Fixed {
    std::size_t p;
};
/// p(n) = ceil(c * n^exponent).
struct Power {
    double c;
    double exponent;
};
}  // namespace prule
using PRule = std::variant<prule::Fixed, prule::Power>;

std::size_t resolve_p(const PRule& rule, std::size_t n);

struct RateStudyConfig {
    double sigma_c = 1.0;
    double alpha = 0.7;  // sigma_j = sigma_c * j^{-alpha}
    CorrelationSpec corr = corr::Identity{};
    PRule p_rule = prule::Fixed{500};
    std::vector<std::size_t> ns{100, 200, 400, 800};
    double tau = 0.8;
    Noise noise = Noise::SymmetricExponential;
    std::size_t ref_draws = 20000;
    std::size_t outer_reps = 50;
    std::size_t B = 2000;
    std::uint64_t seed = 0;
};

struct RatePoint {
    std::size_t n = 0;
    std::size_t p = 0;
    double dk_gauss = 0.0;
    double dk_boot_median = 0.0;
    double dk_boot_q90 = 0.0;
    double noise_scale = 0.0;  // sqrt(1/ref_draws + 1/B): KS resolution of one estimate
};

struct RateStudyResult {
    std::vector<RatePoint> per_n;
    RateFit fit;  // on the bootstrap medians
    double floor = 0.0;
};

/// Model for sample size n: sigma profile and correlation from cfg, p from p_rule.
CovarianceModel rate_model(const RateStudyConfig& cfg, std::size_t n);

RateStudyResult run_rate_study(const RateStudyConfig& cfg, const Executor& exec = serial_executor());

}  // namespace psboot::ratelab
