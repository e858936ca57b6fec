#include <catch_amalgamated.hpp>

#include "psboot/error.hpp"
#include "psboot/maxstat.hpp"
#include "psboot/ratelab.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>

using namespace psboot;
using Catch::Approx;

namespace {

SampleMatrix rows(std::initializer_list<std::initializer_list<double>> r)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return SampleMatrix(m);
}

double ks_against_cdf(std::vector<double> x, const std::function<double(double)>& cdf)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

}  // namespace

TEST_CASE("column statistics")
{
    const ColumnStats a = column_stats(rows({{0, 0}, {1, 1}, {2, 2}}));
    CHECK(a.mean(0) == Approx(1.0));
    CHECK(a.mean(1) == Approx(1.0));
    CHECK(a.cov_hat.isApprox(Eigen::MatrixXd::Constant(2, 2, 2.0 / 3.0)));
    CHECK(a.sigma_hat(0) * a.sigma_hat(0) == a.cov_hat(0, 0));

    const ColumnStats b = column_stats(rows({{1, 4, -2}, {3, 1, 5}}));
    const Eigen::Vector3d diff(1 - 3, 4 - 1, -2 - 5);
    CHECK(b.cov_hat.isApprox(diff * diff.transpose() / 4.0));

    const ColumnStats c = column_stats(rows({{5, 1}, {5, 1}, {5, 1}}));
    CHECK(c.sigma_hat.isZero());
    CHECK(c.cov_hat.isZero());

    const ColumnMoments m = column_moments(rows({{0, 0}, {1, 1}, {2, 2}}));
    CHECK(m.sigma_hat(1) == Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("partially standardised max and min")
{
    const SampleMatrix x = rows({{1, 0}, {3, 2}});
    PartialStdConfig cfg;
    cfg.tau = 1.0;
    cfg.true_sigma = Eigen::Vector2d(1, 1);
    const MaxMin mm = max_min_stat(x, Eigen::Vector2d::Zero(), cfg);
    CHECK(mm.high == Approx(2.0 * std::sqrt(2.0)));
    CHECK(mm.low == Approx(std::sqrt(2.0)));

    PartialStdConfig raw;
    raw.tau = 0.0;
    const MaxMin t = max_min_stat(x, Eigen::Vector2d::Zero(), raw);
    CHECK(t.high == Approx(2.0 * std::sqrt(2.0)));

    const SampleMatrix one = rows({{1}, {2}, {6}});
    PartialStdConfig half;
    half.tau = 0.5;
    half.true_sigma = Eigen::VectorXd::Constant(1, 4.0);
    const MaxMin p1 = max_min_stat(one, Eigen::VectorXd::Constant(1, 1.0), half);
    CHECK(p1.high == Approx(std::sqrt(3.0) * 2.0 / 2.0));
    CHECK(p1.low == p1.high);

    PartialStdConfig zero;
    zero.tau = 0.7;
    zero.true_sigma = Eigen::Vector2d::Zero();
    CHECK_THROWS_AS(max_min_stat(x, Eigen::Vector2d::Zero(), zero), DegenerateInputError);
}

TEST_CASE("common scaling of sigma rescales M by kappa^-tau")
{
    const CovarianceModel m(power_sigma(12, 1.0, 0.6), corr::Autoregressive{0.3});
    const SampleMatrix x = generate_sample(Eigen::VectorXd::Zero(12), m, 40, Noise::SymmetricExponential, 2);
    for (double tau : {0.0, 0.4, 1.0}) {
        PartialStdConfig a;
        a.tau = tau;
        a.true_sigma = m.sigma();
        PartialStdConfig b = a;
        b.true_sigma = m.sigma() * 3.0;
        const MaxMin ma = max_min_stat(x, Eigen::VectorXd::Zero(12), a);
        const MaxMin mb = max_min_stat(x, Eigen::VectorXd::Zero(12), b);
        CHECK(mb.high == Approx(ma.high * std::pow(3.0, -tau)));
        CHECK(ma.low <= ma.high);
    }
}

TEST_CASE("bootstrap draws")
{
    const CovarianceModel m(power_sigma(4, 1.0, 0.5), corr::Autoregressive{0.5});
    const SampleMatrix x = generate_sample(Eigen::VectorXd::Zero(4), m, 30, Noise::Gaussian, 8);

    const BootstrapDraws a = bootstrap_draws(x, 0.5, 300, 21);
    const BootstrapDraws b = bootstrap_draws(x, 0.5, 300, 21);
    CHECK(a.highs == b.highs);
    CHECK(a.lows == b.lows);
    CHECK(a.B == 300);
    for (std::size_t k = 0; k < a.B; ++k) REQUIRE(a.lows[k] <= a.highs[k]);

    ThreadPool pool(3);
    const BootstrapDraws c = bootstrap_draws(x, 0.5, 300, 21, pool);
    CHECK(a.highs == c.highs);

    const BootstrapDraws constant = bootstrap_draws(rows({{1, 2}, {1, 2}, {1, 2}}), 0.8, 50, 1);
    for (std::size_t k = 0; k < 50; ++k) REQUIRE((constant.highs[k] == 0.0 && constant.lows[k] == 0.0));

    CHECK_THROWS_AS(bootstrap_draws(rows({{1, 2}}), 0.5, 10, 1), ValidationError);
    CHECK_THROWS_AS(bootstrap_draws(x, 0.5, 0, 1), ValidationError);
}

TEST_CASE("multiplier sums follow N(0, Sigma_hat)")
{
    const CovarianceModel m(power_sigma(4, 1.0, 0.5), corr::Autoregressive{0.5});
    const SampleMatrix x = generate_sample(Eigen::VectorXd::Zero(4), m, 25, Noise::SymmetricExponential, 8);
    const ColumnStats st = column_stats(x);
    const Eigen::MatrixXd sums = multiplier_sums(x, 50000, 3);
    const Eigen::MatrixXd cov = sums.transpose() * sums / 50000.0;
    CHECK((cov - st.cov_hat).norm() / st.cov_hat.norm() < 0.05);

    // tau = 0: scaling column j by kappa scales S*_j by kappa
    Eigen::MatrixXd scaled = x.rows();
    scaled.col(2) *= 5.0;
    const Eigen::MatrixXd s2 = multiplier_sums(SampleMatrix(scaled), 100, 3);
    const Eigen::MatrixXd s1 = multiplier_sums(x, 100, 3);
    CHECK(s2.col(2).isApprox(5.0 * s1.col(2)));
    CHECK(s2.col(1).isApprox(s1.col(1)));
}

TEST_CASE("gaussian counterpart draws")
{
    boost::math::normal_distribution<> nd;
    PartialStdConfig cfg;
    cfg.tau = 0.3;

    const CovarianceModel one(Eigen::VectorXd::Ones(1), corr::Identity{});
    const auto z = gaussian_max_draws(one, cfg, 10000, 4);
    CHECK(ks_against_cdf(z, [&](double t) { return cdf(nd, t); }) < 0.02);

    cfg.tau = 1.0;
    const CovarianceModel diag(power_sigma(20, 2.0, 0.8), corr::Identity{});
    const auto mx = gaussian_max_draws(diag, cfg, 10000, 5);
    CHECK(ks_against_cdf(mx, [&](double t) { return std::pow(cdf(nd, t), 20.0); }) < 0.02);

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(6, 6);
    const CovarianceModel rank1(power_sigma(6, 1.0, 1.0), corr::Explicit{ones});
    const auto r1 = gaussian_max_draws(rank1, cfg, 10000, 6);
    CHECK(ks_against_cdf(r1, [&](double t) { return cdf(nd, t); }) < 0.02);

    ThreadPool pool(4);
    CHECK(gaussian_max_draws(diag, cfg, 777, 5, pool) == gaussian_max_draws(diag, cfg, 777, 5));
}

TEST_CASE("multiplier and direct sampling agree in conditional law")
{
    const CovarianceModel m(power_sigma(5, 1.0, 0.7), corr::Autoregressive{0.4});
    const SampleMatrix x = generate_sample(Eigen::VectorXd::Zero(5), m, 40, Noise::SymmetricExponential, 10);
    const double tau = 0.6;
    const BootstrapDraws boot = bootstrap_draws(x, tau, 10000, 12);

    const ColumnStats st = column_stats(x);
    Eigen::VectorXd sd = st.cov_hat.diagonal().cwiseSqrt();
    Eigen::MatrixXd r = st.cov_hat;
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) r(i, j) /= sd(i) * sd(j);
    const CovarianceModel hat(sd, corr::Explicit{r});
    PartialStdConfig cfg;
    cfg.tau = tau;
    cfg.true_sigma = st.sigma_hat;
    const auto direct = gaussian_max_draws(hat, cfg, 10000, 13);
    CHECK(ratelab::ks_two_sample(boot.highs, direct) < 0.02);
}

TEST_CASE("empirical quantile convention")
{
    std::vector<double> s(100);
    std::iota(s.begin(), s.end(), 1.0);
    CHECK(empirical_quantile(s, 0.5) == 50.0);
    CHECK(empirical_quantile(s, 0.999) == 100.0);
    CHECK(empirical_quantile(s, 0.001) == 1.0);
    CHECK(empirical_quantile(s, 0.975) == 98.0);
    CHECK(empirical_quantile(std::vector<double>{7.0}, 0.3) == 7.0);
    CHECK_THROWS_AS(empirical_quantile(s, 0.0), ValidationError);
    CHECK_THROWS_AS(empirical_quantile(s, 1.0), ValidationError);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), ValidationError);

    Rng rng(1);
    std::vector<double> x(513);
    for (auto& v : x) v = rng.normal();
    double prev = -INFINITY;
    for (double q = 0.001; q < 1.0; q += 0.0137) {
        const double v = empirical_quantile(x, q);
        REQUIRE(v >= prev);
        prev = v;
    }
}
