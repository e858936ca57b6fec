#include "psboot/multinomial.hpp"

#include "psboot/error.hpp"
#include "psboot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psboot::multinomial {

MultinomialModel::MultinomialModel(std::vector<double> pi) : pi_(std::move(pi))
{
    detail::require(!pi_.empty(), "multinomial model needs p >= 1");
    double total = 0.0;
    for (double v : pi_) {
        detail::require(std::isfinite(v) && v >= 0.0, "cell probabilities must be nonnegative");
        total += v;
    }
    detail::require(std::abs(total - 1.0) <= 1e-12, "cell probabilities must sum to one");
}

Eigen::VectorXd MultinomialModel::sigma() const
{
    Eigen::VectorXd s(static_cast<Eigen::Index>(p()));
    for (std::size_t j = 0; j < p(); ++j) s[static_cast<Eigen::Index>(j)] = std::sqrt(pi_[j] * (1.0 - pi_[j]));
    return s;
}

Eigen::MatrixXd MultinomialModel::covariance() const
{
    const Eigen::Map<const Eigen::VectorXd> pi(pi_.data(), static_cast<Eigen::Index>(p()));
    Eigen::MatrixXd cov = -pi * pi.transpose();
    cov.diagonal() += pi;
    return cov;
}

MultinomialModel zipf_model(std::size_t p, double eta)
{
    detail::require(p >= 1, "zipf model needs p >= 1");
    detail::require(eta >= 1.0 && std::isfinite(eta), "zipf exponent must be at least 1");
    std::vector<double> pi(p);
    for (std::size_t j = 0; j < p; ++j) pi[j] = std::pow(static_cast<double>(j + 1), -eta);
    // Normalise with the smallest terms summed first.
    double total = 0.0;
    for (std::size_t j = p; j-- > 0;) total += pi[j];
    for (double& v : pi) v /= total;
    return MultinomialModel(std::move(pi));
}

CellCounts sample_counts(const MultinomialModel& model, std::uint64_t n, std::uint64_t seed)
{
    detail::require(n >= 1, "need at least one trial");
    std::vector<double> cdf(model.p());
    std::partial_sum(model.pi().begin(), model.pi().end(), cdf.begin());

    CellCounts out;
    out.n = n;
    out.counts.assign(model.p(), 0);
    Rng rng(seed, StreamTag::Counts, 0);
    const double scale = cdf.back();
    for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * scale;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto j = static_cast<std::size_t>(it - cdf.begin());
        j = std::min(j, model.p() - 1);
        // Never land on a zero-probability cell through a flat CDF step.
        while (model.pi()[j] == 0.0 && j > 0) --j;
        ++out.counts[j];
    }
    return out;
}

std::vector<std::size_t> select_cells(const CellCounts& counts, const CellFilterRule& rule)
{
    detail::require(counts.n >= 2, "cell selection needs n >= 2");
    std::vector<std::size_t> cells;
    if (const auto* m = std::get_if<rule::MinCount>(&rule)) {
        detail::require(m->threshold >= 1, "min-count threshold must be at least 1");
        for (std::size_t j = 0; j < counts.counts.size(); ++j)
            if (counts.counts[j] >= m->threshold) cells.push_back(j);
    } else {
        const double n = static_cast<double>(counts.n);
        const double cutoff = std::sqrt(std::log(n) / n);
        for (std::size_t j = 0; j < counts.counts.size(); ++j)
            if (counts.pi_hat(j) >= cutoff) cells.push_back(j);
    }
    return cells;
}

Eigen::MatrixXd indicator_rows(const CellCounts& counts, const std::vector<std::size_t>& cells)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(counts.n), static_cast<Eigen::Index>(cells.size()));
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < counts.counts.size(); ++j) {
        const auto pos = std::find(cells.begin(), cells.end(), j);
        for (std::uint64_t c = 0; c < counts.counts[j]; ++c, ++row)
            if (pos != cells.end()) x(static_cast<Eigen::Index>(row), pos - cells.begin()) = 1.0;
    }
    return x;
}

Eigen::VectorXd cell_sigma_hat(const CellCounts& counts, const std::vector<std::size_t>& cells)
{
    Eigen::VectorXd s(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const double pi_hat = counts.pi_hat(cells[k]);
        s[static_cast<Eigen::Index>(k)] = std::sqrt(pi_hat * (1.0 - pi_hat));
    }
    return s;
}

Eigen::MatrixXd count_multiplier_sums(const CellCounts& counts, const std::vector<std::size_t>& cells, std::size_t B,
                                      std::uint64_t seed)
{
    detail::require(B >= 1, "bootstrap needs B >= 1");
    detail::require(counts.n >= 2, "bootstrap needs n >= 2");
    const std::uint64_t total = std::accumulate(counts.counts.begin(), counts.counts.end(), std::uint64_t{0});
    detail::require(total == counts.n, "cell counts do not sum to n");

    std::vector<std::uint64_t> offset(counts.counts.size() + 1, 0);
    std::partial_sum(counts.counts.begin(), counts.counts.end(), offset.begin() + 1);

    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(counts.n));
    Eigen::MatrixXd sums(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(cells.size()));
    std::vector<double> xi(counts.n);
    for (std::size_t b = 0; b < B; ++b) {
        fill_multipliers(seed, b, xi);
        const double xi_total = std::accumulate(xi.begin(), xi.end(), 0.0);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const std::size_t j = cells[k];
            const double within = std::accumulate(xi.begin() + static_cast<std::ptrdiff_t>(offset[j]),
                                                  xi.begin() + static_cast<std::ptrdiff_t>(offset[j + 1]), 0.0);
            sums(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) =
                (within - counts.pi_hat(j) * xi_total) * inv_root_n;
        }
    }
    return sums;
}

BootstrapDraws restricted_bootstrap_draws(const CellCounts& counts, const std::vector<std::size_t>& cells, double tau,
                                          std::size_t B, std::uint64_t seed)
{
    BootstrapDraws d;
    d.B = B;
    d.tau = tau;
    d.seed = seed;
    d.lows.assign(B, 0.0);
    d.highs.assign(B, 0.0);
    if (cells.empty()) return d;
    const Eigen::MatrixXd sums = count_multiplier_sums(counts, cells, B, seed);
    reduce_draws(sums, standardization_weights(cell_sigma_hat(counts, cells), tau), d.lows, d.highs);
    return d;
}

namespace {

Eigen::VectorXd cell_centers(const CellCounts& counts, const std::vector<std::size_t>& cells)
{
    Eigen::VectorXd c(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t k = 0; k < cells.size(); ++k) c[static_cast<Eigen::Index>(k)] = counts.pi_hat(cells[k]);
    return c;
}

}  // namespace

RestrictedSci restricted_bootstrap_sci(const CellCounts& counts, const CellFilterRule& rule, double tau,
                                       std::size_t B, double rho, std::uint64_t seed)
{
    RestrictedSci out;
    out.cells = select_cells(counts, rule);
    out.tau = tau;
    const BootstrapDraws draws = restricted_bootstrap_draws(counts, out.cells, tau, B, seed);
    out.sci = sci_from_draws(out.cells, cell_centers(counts, out.cells), cell_sigma_hat(counts, out.cells),
                             counts.n, draws, rho);
    return out;
}

RestrictedSci restricted_bootstrap_sci_selected(const CellCounts& counts, const CellFilterRule& rule,
                                                std::span<const double> grid, std::size_t B, double rho,
                                                std::uint64_t seed)
{
    detail::require(!grid.empty(), "tau grid must be nonempty");
    RestrictedSci out;
    out.cells = select_cells(counts, rule);
    if (out.cells.empty()) {
        out.tau = *std::min_element(grid.begin(), grid.end());
        out.sci = restricted_bootstrap_sci(counts, rule, out.tau, B, rho, seed).sci;
        return out;
    }
    const Eigen::MatrixXd sums = count_multiplier_sums(counts, out.cells, B, seed);
    TauSelection sel = select_tau_from_sums(out.cells, cell_centers(counts, out.cells),
                                            cell_sigma_hat(counts, out.cells), counts.n, sums, grid, rho, seed);
    out.tau = sel.tau_star;
    out.sci = std::move(sel.sci);
    return out;
}

double min_eig_lower_bound(const MultinomialModel& model, std::size_t k)
{
    detail::require(k >= 1 && k < model.p(), "min_eig_lower_bound needs 1 <= k < p");
    std::vector<double> sorted = model.pi();
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double head = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    return sorted[k - 1] * (1.0 - head);
}

ExperimentReport run_multinomial_experiment(const ExperimentConfig& cfg, const Executor& exec)
{
    const MultinomialModel model(cfg.pi);
    detail::require(cfg.n >= 2, "experiment needs n >= 2");
    detail::require(cfg.n_sims >= 1, "experiment needs at least one simulation");
    const std::vector<double> grid = cfg.fixed_tau ? std::vector<double>{*cfg.fixed_tau} : cfg.tau_grid;

    ExperimentReport report;
    report.sims.resize(cfg.n_sims);
    exec.parallel_for(cfg.n_sims, [&](std::size_t s) {
        const std::uint64_t sim_seed = stream_seed(cfg.seed, StreamTag::Simulation, s);
        const CellCounts counts = sample_counts(model, cfg.n, sim_seed);
        const RestrictedSci r = restricted_bootstrap_sci_selected(counts, cfg.rule, grid, cfg.B, cfg.rho,
                                                                  stream_seed(sim_seed, StreamTag::Bootstrap, 0));
        std::size_t hits = 0;
        for (std::size_t k = 0; k < r.sci.size(); ++k)
            if (r.sci.contains(k, cfg.pi[r.cells[k]])) ++hits;

        SimRecord& rec = report.sims[s];
        rec.sim_id = s;
        rec.selected_cells = r.cells.size();
        rec.selected_tau = r.tau;
        rec.covered = hits == r.cells.size();
        rec.cell_coverage = r.cells.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(r.cells.size());
    });

    std::size_t covered = 0;
    double cell_cov = 0.0;
    double cells = 0.0;
    for (const auto& rec : report.sims) {
        covered += rec.covered ? 1 : 0;
        cell_cov += rec.cell_coverage;
        cells += static_cast<double>(rec.selected_cells);
        ++report.selected_tau_histogram[rec.selected_tau];
        ++report.selected_cells_histogram[rec.selected_cells];
    }
    const double n_sims = static_cast<double>(cfg.n_sims);
    report.coverage = static_cast<double>(covered) / n_sims;
    report.standard_error = std::sqrt(report.coverage * (1.0 - report.coverage) / n_sims);
    report.mean_cell_coverage = cell_cov / n_sims;
    report.mean_selected_cells = cells / n_sims;
    return report;
}

}  // namespace psboot::multinomial
