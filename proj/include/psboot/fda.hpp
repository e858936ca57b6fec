#pragma once

#include "psboot/model.hpp"
#include "psboot/parallel.hpp"
#include "psboot/sci.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace psboot::fda {

/// Regularised incomplete beta I_t(a, b).
double beta_cdf(double t, double a, double b);

/// Shape omega, scale rho, shift theta. The null mean is {0, 0, 0}.
struct MeanParams {
    double omega = 0.0;
    double rho = 0.0;
    double theta = 0.0;
};

/// (1 + rho)(exp[-(g(t) + 2)^2] + exp[-(g(t) - 2)^2]) + theta with
/// g(t) = 8 h(t) - 4 and h the Beta(2 + omega, 2) distribution function.
double mean_function(const MeanParams& params, double t);

/// Matern covariance with variance 1/16 and smoothness nu.
double matern_cov(double s, double t, double nu);

std::vector<double> equispaced_grid(std::size_t points);

inline constexpr double kDefaultNu = 0.1;
inline constexpr std::size_t kDefaultGridSize = 101;

struct GpConfig {
    std::vector<double> grid = equispaced_grid(kDefaultGridSize);
    double nu = kDefaultNu;
    MeanParams mean;
};

/// Gaussian-process sampler on a fixed grid. Holds the grid mean and the
/// square root of the grid covariance; construct once, sample many times.
class GpSampler {
public:
    explicit GpSampler(const GpConfig& cfg);
    /// Paths as rows; path i draws from stream (seed, GpPath, i).
    Eigen::MatrixXd sample(std::size_t n, std::uint64_t seed) const;
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd root_;
};

Eigen::MatrixXd simulate_gp(const GpConfig& cfg, std::size_t n, std::uint64_t seed);

/// psi_1 = 1, psi_{2k} = sqrt(2) cos(2 pi k t), psi_{2k+1} = sqrt(2) sin(2 pi k t); j is 1-based.
double fourier_basis(std::size_t j, double t);

/// Trapezoidal weights on a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid);

/// Coefficients <Y_i, psi_j> for j = 1..p by trapezoidal quadrature.
class FourierProjector {
public:
    FourierProjector(const std::vector<double>& grid, std::size_t p);
    Eigen::MatrixXd project_rows(const Eigen::MatrixXd& paths) const;
    Eigen::VectorXd project(const Eigen::VectorXd& values) const;
    std::size_t p() const { return static_cast<std::size_t>(weighted_basis_.cols()); }
    /// p exceeds the number of grid points.
    bool under_resolved() const { return under_resolved_; }

private:
    Eigen::MatrixXd weighted_basis_;  // grid x p
    bool under_resolved_ = false;
};

struct Projection {
    SampleMatrix coeffs;
    bool under_resolved = false;
};

Projection fourier_coeffs(const Eigen::MatrixXd& paths, const std::vector<double>& grid, std::size_t p);

inline constexpr std::size_t kTargetResolution = 2048;

/// u_j = <mu, psi_j>, j = 1..p, by trapezoidal quadrature on a fine grid.
Eigen::VectorXd mean_coefficients(const MeanParams& params, std::size_t p,
                                  std::size_t resolution = kTargetResolution);

struct FdaExperimentConfig {
    std::size_t n = 50;
    std::size_t p = 100;
    std::size_t B = kDefaultB;
    double rho = 0.05;
    std::optional<double> fixed_tau;  // unset: select from tau_grid
    std::vector<double> tau_grid = default_tau_grid();
    std::size_t n_sims = 1000;
    std::uint64_t seed = 0;
    MeanParams alternative;
    double nu = kDefaultNu;
    std::size_t grid_size = kDefaultGridSize;
};

struct FdaSimRecord {
    std::size_t sim_id = 0;
    double selected_tau = 0.0;
    bool rejected = false;
    std::size_t max_offending_j = 0;  // 1-based; 0 when nothing is rejected
};

struct FdaReport {
    double rejection_rate = 0.0;
    double standard_error = 0.0;
    std::map<double, std::size_t> selected_tau_histogram;
    std::vector<FdaSimRecord> sims;
    bool under_resolved = false;
};

/// Simulates under cfg.alternative and tests against the coefficients of the
/// null mean function. Simulation s uses stream (seed, Simulation, s).
FdaReport run_fda_experiment(const FdaExperimentConfig& cfg, const Executor& exec = serial_executor());

}  // namespace psboot::fda
