#include "psboot/ratelab.hpp"

#include "psboot/error.hpp"
#include "psboot/linalg.hpp"
#include "psboot/maxstat.hpp"

#include <algorithm>
#include <cmath>

namespace psboot::ratelab {

double ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    detail::require(!a.empty() && !b.empty(), "ks_two_sample: samples must be nonempty");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());

    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    // Past the end of one sample the other ECDF only rises towards 1.
    if (i < x.size()) best = std::max(best, 1.0 - static_cast<double>(i) / nx);
    if (j < y.size()) best = std::max(best, 1.0 - static_cast<double>(j) / ny);
    return best;
}

namespace {
constexpr std::size_t kRefBlock = 256;
}

std::vector<double> reference_max_draws(const CovarianceModel& model, double tau, std::size_t n, Noise noise,
                                        std::size_t count, std::uint64_t seed, const Executor& exec)
{
    detail::require(n >= 1, "sample size must be positive");
    detail::require(count >= 1, "need at least one reference draw");
    const Eigen::VectorXd w = standardization_weights(model.sigma(), tau);
    const auto p = static_cast<Eigen::Index>(model.p());

    std::vector<double> out(count);
    const std::size_t blocks = (count + kRefBlock - 1) / kRefBlock;
    exec.parallel_for(blocks, [&](std::size_t blk) {
        const std::size_t first = blk * kRefBlock;
        const std::size_t cols = std::min(kRefBlock, count - first);
        Eigen::MatrixXd zbar(p, static_cast<Eigen::Index>(cols));
        for (std::size_t c = 0; c < cols; ++c) {
            Rng rng(seed, StreamTag::Reference, first + c);
            for (Eigen::Index j = 0; j < p; ++j) zbar(j, static_cast<Eigen::Index>(c)) = draw_noise_mean(noise, n, rng);
        }
        const Eigen::MatrixXd s = model.apply_sqrt_columns(zbar);
        for (std::size_t c = 0; c < cols; ++c)
            out[first + c] = s.col(static_cast<Eigen::Index>(c)).cwiseProduct(w).maxCoeff();
    });
    return out;
}

double estimate_dk_gaussian(const CovarianceModel& model, const Eigen::VectorXd& mu, double tau, std::size_t n,
                            Noise noise, std::size_t ref_draws, std::uint64_t seed, const Executor& exec)
{
    detail::require(static_cast<std::size_t>(mu.size()) == model.p(), "mean vector has wrong dimension");
    const std::vector<double> ref =
        reference_max_draws(model, tau, n, noise, ref_draws, stream_seed(seed, StreamTag::Reference, 0), exec);
    PartialStdConfig cfg;
    cfg.tau = tau;
    cfg.true_sigma = model.sigma();
    const std::vector<double> gauss =
        gaussian_max_draws(model, cfg, ref_draws, stream_seed(seed, StreamTag::GaussianDraw, 0), exec);
    return ks_two_sample(ref, gauss);
}

BootstrapDistance estimate_dk_bootstrap(const CovarianceModel& model, const Eigen::VectorXd& mu, double tau,
                                        std::size_t n, Noise noise, std::size_t ref_draws, std::size_t outer_reps,
                                        std::size_t B, std::uint64_t seed, const Executor& exec)
{
    detail::require(static_cast<std::size_t>(mu.size()) == model.p(), "mean vector has wrong dimension");
    detail::require(n >= 2, "bootstrap needs n >= 2");
    detail::require(outer_reps >= 1 && B >= 1, "need outer_reps >= 1 and B >= 1");
    const std::vector<double> ref =
        reference_max_draws(model, tau, n, noise, ref_draws, stream_seed(seed, StreamTag::Reference, 0), exec);

    BootstrapDistance out;
    out.all.resize(outer_reps);
    exec.parallel_for(outer_reps, [&](std::size_t r) {
        const std::uint64_t rep_seed = stream_seed(seed, StreamTag::OuterRep, r);
        const SampleMatrix x = generate_sample(mu, model, n, noise, rep_seed);
        const BootstrapDraws d = bootstrap_draws(x, tau, B, stream_seed(rep_seed, StreamTag::Bootstrap, 0));
        out.all[r] = ks_two_sample(ref, d.highs);
    });
    out.median = empirical_quantile(out.all, 0.5);
    out.q90 = empirical_quantile(out.all, 0.9);
    return out;
}

RateFit fit_rate(std::span<const double> ns, std::span<const double> dks, double floor)
{
    detail::require(ns.size() == dks.size() && ns.size() >= 2, "fit_rate needs two or more paired points");
    detail::require(floor > 0.0, "fit_rate floor must be positive");
    RateFit fit;
    Eigen::VectorXd lx(static_cast<Eigen::Index>(ns.size()));
    Eigen::VectorXd ly(lx.size());
    for (std::size_t k = 0; k < ns.size(); ++k) {
        detail::require(ns[k] > 0.0, "sample sizes must be positive");
        double d = dks[k];
        if (!(d >= floor)) {
            d = floor;
            fit.floored = true;
        }
        lx[static_cast<Eigen::Index>(k)] = std::log(ns[k]);
        ly[static_cast<Eigen::Index>(k)] = std::log(d);
    }
    const LineFit line = fit_line(lx, ly);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    return fit;
}

std::size_t resolve_p(const PRule& rule, std::size_t n)
{
    if (const auto* f = std::get_if<prule::Fixed>(&rule)) {
        detail::require(f->p >= 1, "p must be at least 1");
        return f->p;
    }
    const auto& pw = std::get<prule::Power>(rule);
    detail::require(pw.c > 0.0, "p rule scale must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(pw.c * std::pow(static_cast<double>(n), pw.exponent))));
}

CovarianceModel rate_model(const RateStudyConfig& cfg, std::size_t n)
{
    const std::size_t p = resolve_p(cfg.p_rule, n);
    CorrelationSpec corr = cfg.corr;
    return CovarianceModel(power_sigma(p, cfg.sigma_c, cfg.alpha), std::move(corr));
}

RateStudyResult run_rate_study(const RateStudyConfig& cfg, const Executor& exec)
{
    detail::require(!cfg.ns.empty(), "rate study needs sample sizes");
    for (std::size_t k = 0; k < cfg.ns.size(); ++k) {
        detail::require(cfg.ns[k] >= 2, "sample sizes must be at least 2");
        if (k > 0) detail::require(cfg.ns[k] > cfg.ns[k - 1], "sample sizes must be strictly increasing");
    }
    detail::require(cfg.ref_draws >= 10 * cfg.B, "ref_draws must be at least 10 B");

    RateStudyResult result;
    result.floor = 1.0 / (2.0 * static_cast<double>(cfg.ref_draws));
    std::vector<double> ns;
    std::vector<double> medians;
    for (std::size_t k = 0; k < cfg.ns.size(); ++k) {
        const std::size_t n = cfg.ns[k];
        const CovarianceModel model = rate_model(cfg, n);
        const Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.p()));
        const std::uint64_t point_seed = stream_seed(cfg.seed, StreamTag::Batch, k);

        RatePoint pt;
        pt.n = n;
        pt.p = model.p();
        pt.dk_gauss = estimate_dk_gaussian(model, mu, cfg.tau, n, cfg.noise, cfg.ref_draws, point_seed, exec);
        const BootstrapDistance boot = estimate_dk_bootstrap(model, mu, cfg.tau, n, cfg.noise, cfg.ref_draws,
                                                             cfg.outer_reps, cfg.B, point_seed, exec);
        pt.dk_boot_median = boot.median;
        pt.dk_boot_q90 = boot.q90;
        pt.noise_scale = std::sqrt(1.0 / static_cast<double>(cfg.ref_draws) + 1.0 / static_cast<double>(cfg.B));
        result.per_n.push_back(pt);
        ns.push_back(static_cast<double>(n));
        medians.push_back(boot.median);
    }
    if (ns.size() >= 2) result.fit = fit_rate(ns, medians, result.floor);
    return result;
}

}  // namespace psboot::ratelab
