#pragma once

#include "psboot/maxstat.hpp"
#include "psboot/model.hpp"
#include "psboot/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace psboot {

inline constexpr std::size_t kDefaultB = 1000;

/// {0, 0.1, ..., 1}.
std::vector<double> default_tau_grid();

/// Simultaneous intervals [lo_j, hi_j] for the coordinates in `coords`.
struct SciSet {
    std::vector<std::size_t> coords;  // 0-based coordinate of each interval
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> center;     // Xbar_j
    std::vector<double> sigma_hat;  // sigma_hat_j
    double tau = 0.0;
    double rho = 0.05;
    double q_lo = 0.0;  // q_L(rho/2)
    double q_hi = 0.0;  // q_M(1 - rho/2)
    std::size_t n = 0;
    std::size_t B = 0;
    std::uint64_t seed = 0;
    bool few_draws = false;   // B < 20 / rho: quantiles unreliable
    bool degenerate = false;  // no coordinates to cover

    std::size_t size() const { return lo.size(); }
    double width(std::size_t k) const { return hi[k] - lo[k]; }
    double mean_width() const;
    bool contains(std::size_t k, double value) const { return lo[k] <= value && value <= hi[k]; }
};

/// Intervals from precomputed moments and bootstrap draws:
/// [Xbar_j - q_hi sigma_j^tau / sqrt(n), Xbar_j - q_lo sigma_j^tau / sqrt(n)].
SciSet sci_from_draws(std::span<const std::size_t> coords, const Eigen::VectorXd& center,
                      const Eigen::VectorXd& sigma_hat, std::size_t n, const BootstrapDraws& draws, double rho);

SciSet build_sci(const SampleMatrix& x, double tau, std::size_t B, double rho, std::uint64_t seed,
                 const Executor& exec = serial_executor());

struct TauSelection {
    double tau_star = 0.0;
    SciSet sci;
    std::vector<double> mean_widths;  // aligned with the grid
};

/// Builds an SCI for every grid value and keeps the one with the smallest
/// average width (ties: smallest tau). Every grid value is evaluated on the
/// same multiplier draws, so the result for tau_star equals
/// build_sci(x, tau_star, B, rho, seed).
TauSelection select_tau(const SampleMatrix& x, std::span<const double> grid, std::size_t B, double rho,
                        std::uint64_t seed, const Executor& exec = serial_executor());

/// Same rule on raw multiplier sums already drawn for the given coordinates.
TauSelection select_tau_from_sums(std::span<const std::size_t> coords, const Eigen::VectorXd& center,
                                  const Eigen::VectorXd& sigma_hat, std::size_t n, const Eigen::MatrixXd& sums,
                                  std::span<const double> grid, double rho, std::uint64_t seed);

struct MeanTest {
    bool reject = false;
    SciSet sci;
    std::vector<std::size_t> offending;  // 0-based
};

/// Rejects H0: mu = mu0 iff some mu0_j falls outside its interval.
MeanTest test_mean(const SampleMatrix& x, const Eigen::VectorXd& mu0, double tau, std::size_t B, double rho,
                   std::uint64_t seed, const Executor& exec = serial_executor());

/// Coordinates k of `sci` whose target value targets[coords[k]] is not covered.
std::vector<std::size_t> uncovered(const SciSet& sci, const Eigen::VectorXd& targets);

}  // namespace psboot
