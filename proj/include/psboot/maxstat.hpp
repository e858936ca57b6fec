#pragma once

#include "psboot/model.hpp"
#include "psboot/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace psboot {

/// Column means, 1/n-normalised sample covariance and sigma_hat = sqrt(diag).
struct ColumnStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma_hat;
    Eigen::MatrixXd cov_hat;
};

ColumnStats column_stats(const SampleMatrix& x);

/// Mean and sigma_hat only; O(np) and no p x p matrix.
struct ColumnMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma_hat;
};

ColumnMoments column_moments(const SampleMatrix& x);

/// tau in [0, 1]; standardise by true sigma when given, otherwise sigma_hat.
struct PartialStdConfig {
    double tau = 0.0;
    std::optional<Eigen::VectorXd> true_sigma;
};

/// Coordinates with sigma_j < kDegenerateRelTol * max_k sigma_k count as zero.
inline constexpr double kDegenerateRelTol = 1e-12;

/// w_j = sigma_j^{-tau}, or 0 where sigma_j is degenerate (the ratio
/// S_j / sigma_j^tau is then defined as 0).
Eigen::VectorXd standardization_weights(const Eigen::VectorXd& sigma, double tau);

/// Per-coordinate interval scale sigma_j^tau, with degenerate sigma_j read as 0.
Eigen::VectorXd interval_scales(const Eigen::VectorXd& sigma, double tau);

struct MaxMin {
    double low;
    double high;
};

/// L and M for S_{n,j} = sqrt(n) (Xbar_j - mu0_j).
MaxMin max_min_stat(const SampleMatrix& x, const Eigen::VectorXd& mu0, const PartialStdConfig& cfg);

/// B paired draws (L*_b, M*_b) of the Gaussian multiplier bootstrap.
struct BootstrapDraws {
    std::size_t B = 0;
    std::vector<double> lows;
    std::vector<double> highs;
    double tau = 0.0;
    std::uint64_t seed = 0;
};

/// Multipliers xi*_{b,1..n} for draw b; shared by every multiplier-form
/// bootstrap so that different representations of the same data agree.
void fill_multipliers(std::uint64_t seed, std::size_t b, std::span<double> xi);

/// Raw multiplier sums S*_b = n^{-1/2} sum_i xi*_{b,i} (X_i - Xbar), one row per
/// draw, computed in fixed-size blocks without forming Sigma_hat.
Eigen::MatrixXd multiplier_sums(const SampleMatrix& x, std::size_t B, std::uint64_t seed,
                                const Executor& exec = serial_executor());

/// (L*_b, M*_b) from rows of raw sums, weights from standardization_weights.
void reduce_draws(const Eigen::MatrixXd& sums, const Eigen::VectorXd& weights, std::span<double> lows,
                  std::span<double> highs);

BootstrapDraws bootstrap_draws(const SampleMatrix& x, double tau, std::size_t B, std::uint64_t seed,
                               const Executor& exec = serial_executor());

/// Draws of M~ = max_j S~_j / sigma_j^tau with S~ = Sigma^{1/2} z, z ~ N(0, I).
/// Uses cfg.true_sigma when set, the model's sigma otherwise.
std::vector<double> gaussian_max_draws(const CovarianceModel& model, const PartialStdConfig& cfg, std::size_t B,
                                       std::uint64_t seed, const Executor& exec = serial_executor());

/// ceil(qB)-th order statistic, clamped to [1, B].
double empirical_quantile(std::span<const double> samples, double q);

}  // namespace psboot
