#include "psboot/fda.hpp"

#include "psboot/error.hpp"
#include "psboot/linalg.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

namespace psboot::fda {

double beta_cdf(double t, double a, double b)
{
    detail::require(t >= 0.0 && t <= 1.0, "beta_cdf: t must lie in [0, 1]");
    detail::require(a > 0.0 && b > 0.0, "beta_cdf: shapes must be positive");
    if (t == 0.0) return 0.0;
    if (t == 1.0) return 1.0;
    return boost::math::ibeta(a, b, t);
}

double mean_function(const MeanParams& params, double t)
{
    detail::require(2.0 + params.omega > 0.0, "mean_function: 2 + omega must be positive");
    const double g = 8.0 * beta_cdf(t, 2.0 + params.omega, 2.0) - 4.0;
    return (1.0 + params.rho) * (std::exp(-(g + 2.0) * (g + 2.0)) + std::exp(-(g - 2.0) * (g - 2.0))) + params.theta;
}

double matern_cov(double s, double t, double nu)
{
    detail::require(nu > 0.0 && std::isfinite(nu), "matern_cov: nu must be positive");
    const double x = std::sqrt(2.0 * nu) * std::abs(t - s);
    // x^nu K_nu(x) -> 2^{nu-1} Gamma(nu) as x -> 0.
    if (x == 0.0) return 1.0 / 16.0;
    if (x > 700.0) return 0.0;
    const double k = boost::math::cyl_bessel_k(nu, x);
    return std::exp(nu * std::log(x) - std::lgamma(nu) - (nu - 1.0) * std::numbers::ln2) * k / 16.0;
}

std::vector<double> equispaced_grid(std::size_t points)
{
    detail::require(points >= 2, "grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    g.back() = 1.0;
    return g;
}

namespace {
void validate_grid(const std::vector<double>& grid)
{
    detail::require(grid.size() >= 2, "grid needs at least two points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        detail::require(grid[i] >= 0.0 && grid[i] <= 1.0, "grid points must lie in [0, 1]");
        if (i > 0) detail::require(grid[i] > grid[i - 1], "grid must be strictly increasing");
    }
}
}  // namespace

GpSampler::GpSampler(const GpConfig& cfg)
{
    validate_grid(cfg.grid);
    const auto m = static_cast<Eigen::Index>(cfg.grid.size());
    mean_.resize(m);
    cov_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        mean_[i] = mean_function(cfg.mean, cfg.grid[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j <= i; ++j)
            cov_(i, j) = cov_(j, i) =
                matern_cov(cfg.grid[static_cast<std::size_t>(i)], cfg.grid[static_cast<std::size_t>(j)], cfg.nu);
    }
    root_ = matrix_sqrt(cov_);
}

Eigen::MatrixXd GpSampler::sample(std::size_t n, std::uint64_t seed) const
{
    detail::require(n >= 1, "sample size must be positive");
    const auto m = mean_.size();
    Eigen::MatrixXd z(m, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
        Rng rng(seed, StreamTag::GpPath, static_cast<std::uint64_t>(i));
        rng.fill_normal(std::span<double>(z.col(i).data(), static_cast<std::size_t>(m)));
    }
    Eigen::MatrixXd paths = (root_ * z).transpose();
    paths.rowwise() += mean_.transpose();
    return paths;
}

Eigen::MatrixXd simulate_gp(const GpConfig& cfg, std::size_t n, std::uint64_t seed)
{
    return GpSampler(cfg).sample(n, seed);
}

double fourier_basis(std::size_t j, double t)
{
    detail::require(j >= 1, "basis index is 1-based");
    if (j == 1) return 1.0;
    const double k = static_cast<double>(j / 2);
    const double arg = 2.0 * std::numbers::pi * k * t;
    return std::numbers::sqrt2 * (j % 2 == 0 ? std::cos(arg) : std::sin(arg));
}

Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid)
{
    validate_grid(grid);
    const std::size_t m = grid.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double half = 0.5 * (grid[i + 1] - grid[i]);
        w[static_cast<Eigen::Index>(i)] += half;
        w[static_cast<Eigen::Index>(i + 1)] += half;
    }
    return w;
}

FourierProjector::FourierProjector(const std::vector<double>& grid, std::size_t p)
{
    detail::require(p >= 1, "need at least one basis function");
    const Eigen::VectorXd w = trapezoid_weights(grid);
    weighted_basis_.resize(w.size(), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        for (std::size_t j = 1; j <= p; ++j)
            weighted_basis_(i, static_cast<Eigen::Index>(j - 1)) = w[i] * fourier_basis(j, grid[static_cast<std::size_t>(i)]);
    under_resolved_ = p > grid.size();
}

Eigen::MatrixXd FourierProjector::project_rows(const Eigen::MatrixXd& paths) const
{
    detail::require(paths.cols() == weighted_basis_.rows(), "paths do not match the projection grid");
    return paths * weighted_basis_;
}

Eigen::VectorXd FourierProjector::project(const Eigen::VectorXd& values) const
{
    detail::require(values.size() == weighted_basis_.rows(), "values do not match the projection grid");
    return weighted_basis_.transpose() * values;
}

Projection fourier_coeffs(const Eigen::MatrixXd& paths, const std::vector<double>& grid, std::size_t p)
{
    const FourierProjector projector(grid, p);
    return {SampleMatrix(projector.project_rows(paths)), projector.under_resolved()};
}

Eigen::VectorXd mean_coefficients(const MeanParams& params, std::size_t p, std::size_t resolution)
{
    const std::vector<double> grid = equispaced_grid(resolution);
    Eigen::VectorXd values(static_cast<Eigen::Index>(resolution));
    for (std::size_t i = 0; i < resolution; ++i) values[static_cast<Eigen::Index>(i)] = mean_function(params, grid[i]);
    return FourierProjector(grid, p).project(values);
}

FdaReport run_fda_experiment(const FdaExperimentConfig& cfg, const Executor& exec)
{
    detail::require(cfg.n >= 2, "experiment needs n >= 2");
    detail::require(cfg.n_sims >= 1, "experiment needs at least one simulation");
    detail::require(cfg.fixed_tau || !cfg.tau_grid.empty(), "tau grid must be nonempty");

    GpConfig gp;
    gp.grid = equispaced_grid(cfg.grid_size);
    gp.nu = cfg.nu;
    gp.mean = cfg.alternative;
    const GpSampler sampler(gp);
    const FourierProjector projector(gp.grid, cfg.p);
    const Eigen::VectorXd targets = mean_coefficients(MeanParams{}, cfg.p);
    const std::vector<double> grid = cfg.fixed_tau ? std::vector<double>{*cfg.fixed_tau} : cfg.tau_grid;

    FdaReport report;
    report.under_resolved = projector.under_resolved();
    report.sims.resize(cfg.n_sims);
    exec.parallel_for(cfg.n_sims, [&](std::size_t s) {
        const std::uint64_t sim_seed = stream_seed(cfg.seed, StreamTag::Simulation, s);
        const SampleMatrix x(projector.project_rows(sampler.sample(cfg.n, sim_seed)));
        const TauSelection sel =
            select_tau(x, grid, cfg.B, cfg.rho, stream_seed(sim_seed, StreamTag::Bootstrap, 0));
        FdaSimRecord& rec = report.sims[s];
        rec.sim_id = s;
        rec.selected_tau = sel.tau_star;
        const auto bad = uncovered(sel.sci, targets);
        rec.rejected = !bad.empty();
        rec.max_offending_j = bad.empty() ? 0 : sel.sci.coords[bad.back()] + 1;
    });

    std::size_t rejections = 0;
    for (const auto& rec : report.sims) {
        rejections += rec.rejected ? 1 : 0;
        ++report.selected_tau_histogram[rec.selected_tau];
    }
    const double n_sims = static_cast<double>(cfg.n_sims);
    report.rejection_rate = static_cast<double>(rejections) / n_sims;
    report.standard_error = std::sqrt(report.rejection_rate * (1.0 - report.rejection_rate) / n_sims);
    return report;
}

}  // namespace psboot::fda
