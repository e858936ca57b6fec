#pragma once

#include "psboot/maxstat.hpp"
#include "psboot/parallel.hpp"
#include "psboot/sci.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace psboot::multinomial {

/// Cell probabilities; sigma_j^2 = pi_j (1 - pi_j).
class MultinomialModel {
public:
    explicit MultinomialModel(std::vector<double> pi);
    std::size_t p() const { return pi_.size(); }
    const std::vector<double>& pi() const { return pi_; }
    Eigen::VectorXd sigma() const;
    /// Sigma_ij = pi_i 1{i=j} - pi_i pi_j.
    Eigen::MatrixXd covariance() const;

private:
    std::vector<double> pi_;
};

/// pi_j proportional to j^{-eta}.
MultinomialModel zipf_model(std::size_t p, double eta);

struct CellCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;

    double pi_hat(std::size_t j) const { return static_cast<double>(counts[j]) / static_cast<double>(n); }
};

/// n categorical draws by inverse CDF, one uniform per trial.
CellCounts sample_counts(const MultinomialModel& model, std::uint64_t n, std::uint64_t seed);

namespace rule {
/// pi_hat_j >= sqrt(log(n) / n).
struct Theoretical {};
/// counts_j >= threshold.
struct MinCount {
    std::uint64_t threshold = 5;
};
}  // namespace rule
using CellFilterRule = std::variant<rule::Theoretical, rule::MinCount>;

/// Selected cells (0-based, ascending); possibly empty.
std::vector<std::size_t> select_cells(const CellCounts& counts, const CellFilterRule& rule);

/// Indicator rows e_{c(i)} in canonical order: all observations of cell 0,
/// then cell 1, and so on. Restricted to `cells` when given.
Eigen::MatrixXd indicator_rows(const CellCounts& counts, const std::vector<std::size_t>& cells);

/// Raw multiplier sums S*_{b,j} = n^{-1/2} sum_i xi*_{b,i} (1{X_i = e_j} - pi_hat_j)
/// for j in `cells`, grouping observations by cell (O(n) per draw).
/// Observations follow the canonical order of indicator_rows, and the
/// multipliers come from fill_multipliers, so the result matches the
/// matrix-form multiplier_sums on indicator rows.
Eigen::MatrixXd count_multiplier_sums(const CellCounts& counts, const std::vector<std::size_t>& cells, std::size_t B,
                                      std::uint64_t seed);

/// (L*, M*) over the selected cells; 0 when `cells` is empty.
BootstrapDraws restricted_bootstrap_draws(const CellCounts& counts, const std::vector<std::size_t>& cells, double tau,
                                          std::size_t B, std::uint64_t seed);

Eigen::VectorXd cell_sigma_hat(const CellCounts& counts, const std::vector<std::size_t>& cells);

/// SCI for pi_j, j in the selected set, with fixed tau or tau chosen by the
/// minimum-average-width rule over `grid`.
struct RestrictedSci {
    std::vector<std::size_t> cells;
    SciSet sci;
    double tau = 0.0;
};

RestrictedSci restricted_bootstrap_sci(const CellCounts& counts, const CellFilterRule& rule, double tau,
                                       std::size_t B, double rho, std::uint64_t seed);
RestrictedSci restricted_bootstrap_sci_selected(const CellCounts& counts, const CellFilterRule& rule,
                                                std::span<const double> grid, std::size_t B, double rho,
                                                std::uint64_t seed);

/// pi_(k) (1 - sum_{j<=k} pi_(j)), a lower bound on lambda_min of the covariance
/// of the k most probable cells. Requires 1 <= k < p.
double min_eig_lower_bound(const MultinomialModel& model, std::size_t k);

struct ExperimentConfig {
    std::vector<double> pi;
    std::uint64_t n = 500;
    std::size_t B = 500;
    double rho = 0.05;
    std::optional<double> fixed_tau;
    std::vector<double> tau_grid = default_tau_grid();
    CellFilterRule rule = rule::MinCount{5};
    std::size_t n_sims = 1000;
    std::uint64_t seed = 0;
};

struct SimRecord {
    std::size_t sim_id = 0;
    bool covered = false;
    std::size_t selected_cells = 0;
    double selected_tau = 0.0;
    double cell_coverage = 1.0;  // fraction of selected cells covered
};

struct ExperimentReport {
    double coverage = 0.0;  // simultaneous
    double standard_error = 0.0;
    double mean_cell_coverage = 0.0;
    double mean_selected_cells = 0.0;
    std::map<double, std::size_t> selected_tau_histogram;
    std::map<std::size_t, std::size_t> selected_cells_histogram;
    std::vector<SimRecord> sims;
};

/// Simulation s samples counts with stream (seed, Simulation, s); an empty
/// selected set counts as covered.
ExperimentReport run_multinomial_experiment(const ExperimentConfig& cfg, const Executor& exec = serial_executor());

}  // namespace psboot::multinomial
