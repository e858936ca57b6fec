#include "psboot/sci.hpp"

#include "psboot/error.hpp"

#include <cmath>
#include <numeric>

namespace psboot {

std::vector<double> default_tau_grid()
{
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
    return grid;
}

double SciSet::mean_width() const
{
    if (lo.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) total += width(k);
    return total / static_cast<double>(lo.size());
}

SciSet sci_from_draws(std::span<const std::size_t> coords, const Eigen::VectorXd& center,
                      const Eigen::VectorXd& sigma_hat, std::size_t n, const BootstrapDraws& draws, double rho)
{
    detail::require(rho > 0.0 && rho < 1.0, "significance level must lie in (0, 1)");
    detail::require(n >= 2, "SCI needs n >= 2");
    detail::require(static_cast<std::size_t>(center.size()) == coords.size() &&
                        static_cast<std::size_t>(sigma_hat.size()) == coords.size(),
                    "sci_from_draws: dimension mismatch");
    detail::require(draws.B >= 1 && draws.lows.size() == draws.B && draws.highs.size() == draws.B,
                    "sci_from_draws: malformed draws");

    SciSet sci;
    sci.coords.assign(coords.begin(), coords.end());
    sci.tau = draws.tau;
    sci.rho = rho;
    sci.n = n;
    sci.B = draws.B;
    sci.seed = draws.seed;
    sci.few_draws = static_cast<double>(draws.B) < 20.0 / rho;
    sci.degenerate = coords.empty();
    sci.q_lo = empirical_quantile(draws.lows, rho / 2.0);
    sci.q_hi = empirical_quantile(draws.highs, 1.0 - rho / 2.0);

    const Eigen::VectorXd scale = interval_scales(sigma_hat, draws.tau) / std::sqrt(static_cast<double>(n));
    const auto size = coords.size();
    sci.lo.resize(size);
    sci.hi.resize(size);
    sci.center.assign(center.data(), center.data() + center.size());
    sci.sigma_hat.assign(sigma_hat.data(), sigma_hat.data() + sigma_hat.size());
    for (std::size_t k = 0; k < size; ++k) {
        const auto j = static_cast<Eigen::Index>(k);
        sci.lo[k] = center[j] - sci.q_hi * scale[j];
        sci.hi[k] = center[j] - sci.q_lo * scale[j];
    }
    return sci;
}

namespace {
std::vector<std::size_t> all_coords(std::size_t p)
{
    std::vector<std::size_t> c(p);
    std::iota(c.begin(), c.end(), std::size_t{0});
    return c;
}
}  // namespace

SciSet build_sci(const SampleMatrix& x, double tau, std::size_t B, double rho, std::uint64_t seed,
                 const Executor& exec)
{
    detail::require(x.n() >= 2, "SCI needs n >= 2");
    const ColumnMoments m = column_moments(x);
    const BootstrapDraws draws = bootstrap_draws(x, tau, B, seed, exec);
    return sci_from_draws(all_coords(x.p()), m.mean, m.sigma_hat, x.n(), draws, rho);
}

TauSelection select_tau_from_sums(std::span<const std::size_t> coords, const Eigen::VectorXd& center,
                                  const Eigen::VectorXd& sigma_hat, std::size_t n, const Eigen::MatrixXd& sums,
                                  std::span<const double> grid, double rho, std::uint64_t seed)
{
    detail::require(!grid.empty(), "tau grid must be nonempty");
    for (double t : grid) detail::require(t >= 0.0 && t <= 1.0, "tau grid values must lie in [0, 1]");
    const auto B = static_cast<std::size_t>(sums.rows());

    TauSelection sel;
    bool have = false;
    BootstrapDraws draws;
    draws.B = B;
    draws.seed = seed;
    draws.lows.resize(B);
    draws.highs.resize(B);
    for (double t : grid) {
        draws.tau = t;
        reduce_draws(sums, standardization_weights(sigma_hat, t), draws.lows, draws.highs);
        SciSet sci = sci_from_draws(coords, center, sigma_hat, n, draws, rho);
        const double w = sci.mean_width();
        sel.mean_widths.push_back(w);
        if (!have || w < sel.sci.mean_width() || (w == sel.sci.mean_width() && t < sel.tau_star)) {
            sel.tau_star = t;
            sel.sci = std::move(sci);
            have = true;
        }
    }
    return sel;
}

TauSelection select_tau(const SampleMatrix& x, std::span<const double> grid, std::size_t B, double rho,
                        std::uint64_t seed, const Executor& exec)
{
    detail::require(x.n() >= 2, "SCI needs n >= 2");
    const ColumnMoments m = column_moments(x);
    const Eigen::MatrixXd sums = multiplier_sums(x, B, seed, exec);
    return select_tau_from_sums(all_coords(x.p()), m.mean, m.sigma_hat, x.n(), sums, grid, rho, seed);
}

std::vector<std::size_t> uncovered(const SciSet& sci, const Eigen::VectorXd& targets)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < sci.size(); ++k) {
        const auto j = sci.coords[k];
        detail::require(j < static_cast<std::size_t>(targets.size()), "target vector too short");
        if (!sci.contains(k, targets[static_cast<Eigen::Index>(j)])) out.push_back(k);
    }
    return out;
}

MeanTest test_mean(const SampleMatrix& x, const Eigen::VectorXd& mu0, double tau, std::size_t B, double rho,
                   std::uint64_t seed, const Executor& exec)
{
    detail::require(static_cast<std::size_t>(mu0.size()) == x.p(), "mu0 has wrong dimension");
    MeanTest t;
    t.sci = build_sci(x, tau, B, rho, seed, exec);
    for (std::size_t k : uncovered(t.sci, mu0)) t.offending.push_back(t.sci.coords[k]);
    t.reject = !t.offending.empty();
    return t;
}

}  // namespace psboot
