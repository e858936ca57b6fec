#include "psboot/maxstat.hpp"

#include "psboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psboot {

namespace {

// Draws are produced in blocks of this many rows. Block boundaries depend only
// on B, never on the executor, so every product is evaluated identically.
constexpr std::size_t kBlock = 128;

std::size_t block_count(std::size_t total) { return (total + kBlock - 1) / kBlock; }

Eigen::MatrixXd centered_rows(const SampleMatrix& x, const Eigen::VectorXd& mean)
{
    return x.rows().rowwise() - mean.transpose();
}

}  // namespace

ColumnMoments column_moments(const SampleMatrix& x)
{
    ColumnMoments m;
    m.mean = x.rows().colwise().mean().transpose();
    const Eigen::MatrixXd c = centered_rows(x, m.mean);
    m.sigma_hat = (c.colwise().squaredNorm().transpose() / static_cast<double>(x.n())).cwiseSqrt();
    return m;
}

ColumnStats column_stats(const SampleMatrix& x)
{
    ColumnStats s;
    s.mean = x.rows().colwise().mean().transpose();
    const Eigen::MatrixXd c = centered_rows(x, s.mean);
    s.cov_hat = (c.transpose() * c) / static_cast<double>(x.n());
    s.cov_hat = 0.5 * (s.cov_hat + s.cov_hat.transpose());
    s.sigma_hat = s.cov_hat.diagonal().cwiseSqrt();
    return s;
}

Eigen::VectorXd standardization_weights(const Eigen::VectorXd& sigma, double tau)
{
    detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    const double cutoff = sigma.size() > 0 ? kDegenerateRelTol * sigma.maxCoeff() : 0.0;
    Eigen::VectorXd w(sigma.size());
    for (Eigen::Index j = 0; j < sigma.size(); ++j)
        w[j] = (sigma[j] > cutoff && sigma[j] > 0.0) ? std::pow(sigma[j], -tau) : 0.0;
    return w;
}

Eigen::VectorXd interval_scales(const Eigen::VectorXd& sigma, double tau)
{
    detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    const double cutoff = sigma.size() > 0 ? kDegenerateRelTol * sigma.maxCoeff() : 0.0;
    Eigen::VectorXd s(sigma.size());
    for (Eigen::Index j = 0; j < sigma.size(); ++j)
        s[j] = std::pow((sigma[j] > cutoff && sigma[j] > 0.0) ? sigma[j] : 0.0, tau);
    return s;
}

MaxMin max_min_stat(const SampleMatrix& x, const Eigen::VectorXd& mu0, const PartialStdConfig& cfg)
{
    detail::require(static_cast<std::size_t>(mu0.size()) == x.p(), "mu0 has wrong dimension");
    const ColumnMoments m = column_moments(x);
    const Eigen::VectorXd& sigma = cfg.true_sigma ? *cfg.true_sigma : m.sigma_hat;
    detail::require(static_cast<std::size_t>(sigma.size()) == x.p(), "reference sigma has wrong dimension");
    if (cfg.tau > 0.0 && (sigma.array() <= 0.0).all())
        throw DegenerateInputError("every reference standard deviation is zero");

    const Eigen::VectorXd w = standardization_weights(sigma, cfg.tau);
    const Eigen::VectorXd stat = std::sqrt(static_cast<double>(x.n())) * (m.mean - mu0).cwiseProduct(w);
    return {stat.minCoeff(), stat.maxCoeff()};
}

void fill_multipliers(std::uint64_t seed, std::size_t b, std::span<double> xi)
{
    Rng rng(seed, StreamTag::Multiplier, b);
    rng.fill_normal(xi);
}

Eigen::MatrixXd multiplier_sums(const SampleMatrix& x, std::size_t B, std::uint64_t seed, const Executor& exec)
{
    detail::require(B >= 1, "bootstrap needs B >= 1");
    detail::require(x.n() >= 2, "bootstrap needs n >= 2");
    const Eigen::VectorXd mean = x.rows().colwise().mean().transpose();
    const Eigen::MatrixXd centered = centered_rows(x, mean) / std::sqrt(static_cast<double>(x.n()));
    const auto n = static_cast<Eigen::Index>(x.n());

    Eigen::MatrixXd sums(static_cast<Eigen::Index>(B), centered.cols());
    exec.parallel_for(block_count(B), [&](std::size_t blk) {
        const std::size_t first = blk * kBlock;
        const std::size_t rows = std::min(kBlock, B - first);
        // Row-major so each draw's multipliers are contiguous.
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xi(static_cast<Eigen::Index>(rows), n);
        for (std::size_t r = 0; r < rows; ++r)
            fill_multipliers(seed, first + r, std::span<double>(xi.row(static_cast<Eigen::Index>(r)).data(), x.n()));
        sums.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)).noalias() = xi * centered;
    });
    return sums;
}

void reduce_draws(const Eigen::MatrixXd& sums, const Eigen::VectorXd& weights, std::span<double> lows,
                  std::span<double> highs)
{
    detail::require(sums.cols() == weights.size(), "reduce_draws: weight dimension mismatch");
    const auto rows = static_cast<std::size_t>(sums.rows());
    detail::require(lows.size() == rows && highs.size() == rows, "reduce_draws: output size mismatch");
    for (Eigen::Index b = 0; b < sums.rows(); ++b) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (Eigen::Index j = 0; j < sums.cols(); ++j) {
            const double v = sums(b, j) * weights[j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (sums.cols() == 0) lo = hi = 0.0;
        lows[static_cast<std::size_t>(b)] = lo;
        highs[static_cast<std::size_t>(b)] = hi;
    }
}

BootstrapDraws bootstrap_draws(const SampleMatrix& x, double tau, std::size_t B, std::uint64_t seed,
                               const Executor& exec)
{
    const Eigen::MatrixXd sums = multiplier_sums(x, B, seed, exec);
    const ColumnMoments m = column_moments(x);

    BootstrapDraws d;
    d.B = B;
    d.tau = tau;
    d.seed = seed;
    d.lows.resize(B);
    d.highs.resize(B);
    reduce_draws(sums, standardization_weights(m.sigma_hat, tau), d.lows, d.highs);
    return d;
}

std::vector<double> gaussian_max_draws(const CovarianceModel& model, const PartialStdConfig& cfg, std::size_t B,
                                       std::uint64_t seed, const Executor& exec)
{
    detail::require(B >= 1, "need B >= 1");
    const Eigen::VectorXd& sigma = cfg.true_sigma ? *cfg.true_sigma : model.sigma();
    detail::require(static_cast<std::size_t>(sigma.size()) == model.p(), "reference sigma has wrong dimension");
    const Eigen::VectorXd w = standardization_weights(sigma, cfg.tau);
    const auto p = static_cast<Eigen::Index>(model.p());

    std::vector<double> out(B);
    exec.parallel_for(block_count(B), [&](std::size_t blk) {
        const std::size_t first = blk * kBlock;
        const std::size_t cols = std::min(kBlock, B - first);
        Eigen::MatrixXd z(p, static_cast<Eigen::Index>(cols));
        for (std::size_t c = 0; c < cols; ++c) {
            Rng rng(seed, StreamTag::GaussianDraw, first + c);
            rng.fill_normal(std::span<double>(z.col(static_cast<Eigen::Index>(c)).data(), model.p()));
        }
        const Eigen::MatrixXd s = model.apply_sqrt_columns(z);
        for (std::size_t c = 0; c < cols; ++c)
            out[first + c] = s.col(static_cast<Eigen::Index>(c)).cwiseProduct(w).maxCoeff();
    });
    return out;
}

double empirical_quantile(std::span<const double> samples, double q)
{
    detail::require(!samples.empty(), "empirical_quantile: no samples");
    detail::require(q > 0.0 && q < 1.0, "empirical_quantile: q must lie in (0, 1)");
    const auto size = samples.size();
    // Guard against q * B landing a rounding error above an integer.
    const double position = std::ceil(q * static_cast<double>(size) - 1e-9);
    const auto k = static_cast<std::size_t>(std::clamp(position, 1.0, static_cast<double>(size)));
    std::vector<double> work(samples.begin(), samples.end());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1), work.end());
    return work[k - 1];
}

}  // namespace psboot
