#include <catch_amalgamated.hpp>

#include "psboot/error.hpp"
#include "psboot/fda.hpp"

#include <cmath>

using namespace psboot;
using namespace psboot::fda;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("beta distribution function")
{
    CHECK(beta_cdf(0.0, 2.0, 2.0) == 0.0);
    CHECK(beta_cdf(1.0, 2.0, 2.0) == 1.0);
    CHECK_THAT(beta_cdf(0.5, 2.0, 2.0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(beta_cdf(0.25, 2.0, 2.0), WithinAbs(0.15625, 1e-15));
    for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        REQUIRE_THAT(beta_cdf(t, 2.0, 2.0), WithinAbs(3 * t * t - 2 * t * t * t, 1e-12));
    }
    CHECK_THAT(beta_cdf(0.3, 2.5, 2.0), WithinAbs(0.1355613329825286, 1e-14));
    CHECK_THROWS_AS(beta_cdf(1.2, 2.0, 2.0), ValidationError);
    CHECK_THROWS_AS(beta_cdf(0.5, 0.0, 2.0), ValidationError);
}

TEST_CASE("mean function family")
{
    CHECK_THAT(mean_function({}, 0.5), WithinAbs(2.0 * std::exp(-4.0), 1e-15));
    CHECK_THAT(mean_function({0.5, 0.2, 0.1}, 0.3), WithinAbs(0.61900810068026544, 1e-13));
    for (int i = 0; i <= 50; ++i) {
        const double t = i / 50.0;
        REQUIRE_THAT(mean_function({0, 0, 0.3}, t), WithinAbs(mean_function({}, t) + 0.3, 1e-14));
        REQUIRE_THAT(mean_function({0, 0.4, 0}, t), WithinAbs(1.4 * mean_function({}, t), 1e-14));
    }
    // Lipschitz on a fine grid: no jumps
    for (double omega : {-1.5, 0.0, 0.7, 3.0}) {
        double prev = mean_function({omega, 0, 0}, 0.0);
        for (int i = 1; i <= 10000; ++i) {
            const double cur = mean_function({omega, 0, 0}, i / 10000.0);
            REQUIRE(std::abs(cur - prev) < 0.02);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(mean_function({-2.0, 0, 0}, 0.5), ValidationError);
}

TEST_CASE("matern covariance")
{
    CHECK(matern_cov(0.3, 0.3, 0.1) == 1.0 / 16.0);
    CHECK(matern_cov(0.0, 0.0, 2.7) == 1.0 / 16.0);
    for (double d : {1e-6, 0.01, 0.1, 0.5, 1.0, 3.0}) {
        REQUIRE_THAT(matern_cov(0.0, d, 0.5), WithinRel(std::exp(-d) / 16.0, 1e-10));
    }
    CHECK_THAT(matern_cov(0.0, 0.3, 0.1), WithinRel(0.021748765310091954, 1e-10));
    CHECK_THAT(matern_cov(0.2, 0.21, 0.1), WithinRel(0.041786290912280016, 1e-10));
    CHECK_THAT(matern_cov(1.0, 0.0, 0.1), WithinRel(0.011593694152917253, 1e-10));
    CHECK_THAT(matern_cov(0.0, 0.5, 2.5), WithinRel(0.051790571401132829, 1e-10));
    double prev = matern_cov(0.0, 0.0, 0.1);
    for (double d = 0.05; d < 2000.0; d *= 1.5) {
        const double cur = matern_cov(0.0, d, 0.1);
        REQUIRE(cur <= prev);
        prev = cur;
    }
    CHECK(matern_cov(0.0, 1e5, 0.1) < 1e-12);
    CHECK_THROWS_AS(matern_cov(0.0, 0.1, 0.0), ValidationError);
}

TEST_CASE("grid covariance is positive semidefinite")
{
    for (double nu : {0.1, 0.5, 1.5})
        for (std::size_t m : {11, 101, 257}) {
            GpConfig cfg;
            cfg.grid = equispaced_grid(m);
            cfg.nu = nu;
            const GpSampler s(cfg);
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.covariance()).eigenvalues();
            REQUIRE(ev.minCoeff() >= -1e-10 * ev.cwiseAbs().maxCoeff());
        }
}

TEST_CASE("gaussian process paths")
{
    GpConfig cfg;
    const GpSampler s(cfg);
    const Eigen::MatrixXd a = s.sample(20, 4);
    CHECK(a.rows() == 20);
    CHECK(a.cols() == 101);
    CHECK(a == simulate_gp(cfg, 20, 4));
    CHECK_FALSE(a == simulate_gp(cfg, 20, 5));

    const Eigen::MatrixXd big = s.sample(20000, 1);
    const Eigen::RowVectorXd mean = big.colwise().mean();
    for (Eigen::Index j = 0; j < 101; j += 10) {
        const double var = (big.col(j).array() - mean(j)).square().mean();
        REQUIRE_THAT(var, WithinRel(1.0 / 16.0, 0.05));
        REQUIRE_THAT(mean(j), WithinAbs(s.mean()(j), 0.01));
    }
    CHECK_THROWS_AS(simulate_gp(cfg, 0, 1), ValidationError);
}

TEST_CASE("fourier projection")
{
    const auto grid = equispaced_grid(101);
    CHECK(fourier_basis(1, 0.37) == 1.0);
    CHECK_THAT(fourier_basis(2, 0.25), WithinAbs(0.0, 1e-15));
    CHECK_THAT(fourier_basis(3, 0.25), WithinAbs(std::sqrt(2.0), 1e-15));

    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(1, 101, 2.5);
    const Projection pc = fourier_coeffs(c, grid, 30);
    CHECK_THAT(pc.coeffs.rows()(0, 0), WithinAbs(2.5, 1e-10));
    for (Eigen::Index j = 1; j < 30; ++j) REQUIRE_THAT(pc.coeffs.rows()(0, j), WithinAbs(0.0, 1e-10));
    CHECK_FALSE(pc.under_resolved);
    CHECK(fourier_coeffs(c, grid, 150).under_resolved);

    const Eigen::VectorXd w = trapezoid_weights(grid);
    CHECK_THAT(w.sum(), WithinAbs(1.0, 1e-14));
    for (std::size_t i = 1; i <= 20; ++i)
        for (std::size_t j = 1; j <= 20; ++j) {
            double g = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k)
                g += w(static_cast<Eigen::Index>(k)) * fourier_basis(i, grid[k]) * fourier_basis(j, grid[k]);
            REQUIRE_THAT(g, WithinAbs(i == j ? 1.0 : 0.0, 1e-3));
        }
}

TEST_CASE("null targets")
{
    const Eigen::VectorXd u = mean_coefficients({}, 100);
    const double expected[] = {0.3540898973289438, -0.17005518579903645, 0.0, -0.21445976944121217, 0.0,
                               0.19898777262147427, 0.0};
    for (int j = 0; j < 7; ++j) CHECK_THAT(u(j), WithinAbs(expected[j], 1e-8));

    const auto grid = equispaced_grid(101);
    Eigen::VectorXd values(101);
    for (Eigen::Index k = 0; k < 101; ++k) values(k) = mean_function({}, grid[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd coarse = FourierProjector(grid, 100).project(values);
    CHECK((coarse - u).cwiseAbs().maxCoeff() < 1e-6);

    const Eigen::VectorXd shifted = mean_coefficients({0, 0, 0.25}, 100);
    CHECK_THAT(shifted(0) - u(0), WithinAbs(0.25, 1e-10));
    CHECK((shifted.tail(99) - u.tail(99)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("coefficient variances decay")
{
    // Population sd of <Y, psi_j> under the grid covariance.
    auto profile = [](std::size_t m) {
        GpConfig cfg;
        cfg.grid = equispaced_grid(m);
        const GpSampler s(cfg);
        const FourierProjector proj(cfg.grid, 100);
        const Eigen::MatrixXd cp = proj.project_rows(s.covariance());
        const Eigen::MatrixXd cov = proj.project_rows(cp.transpose());
        Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
        std::sort(sd.data(), sd.data() + sd.size(), std::greater<>());
        return sd;
    };
    const Eigen::VectorXd coarse = profile(101);
    const Eigen::VectorXd fine = profile(1001);
    CHECK_THAT(coarse(0), WithinRel(0.15, 0.05));
    CHECK_THAT(fine(0), WithinRel(0.15, 0.05));
    const double a_coarse = fit_decay_exponent(coarse);
    const double a_fine = fit_decay_exponent(fine);
    CHECK(a_coarse > 0.3);
    CHECK(a_fine > a_coarse);
    CHECK(a_fine > 0.55);

    GpConfig cfg;
    const Eigen::MatrixXd paths = simulate_gp(cfg, 2000, 3);
    const DecayDiagnostics d = decay_diagnostics(fourier_coeffs(paths, cfg.grid, 100).coeffs);
    CHECK_THAT(d.alpha_hat, WithinAbs(a_coarse, 0.05));
}

TEST_CASE("experiment runner")
{
    FdaExperimentConfig cfg;
    cfg.n = 20;
    cfg.p = 30;
    cfg.B = 200;
    cfg.n_sims = 40;
    cfg.seed = 5;
    const FdaReport a = run_fda_experiment(cfg);
    REQUIRE(a.sims.size() == 40);
    std::size_t rejected = 0;
    for (const auto& s : a.sims) {
        rejected += s.rejected;
        REQUIRE((s.rejected ? s.max_offending_j >= 1 && s.max_offending_j <= 30 : s.max_offending_j == 0));
    }
    CHECK(a.rejection_rate == Approx(rejected / 40.0));
    std::size_t hist = 0;
    for (const auto& [tau, count] : a.selected_tau_histogram) hist += count;
    CHECK(hist == 40);

    ThreadPool pool(4);
    const FdaReport b = run_fda_experiment(cfg, pool);
    for (std::size_t i = 0; i < 40; ++i) {
        REQUIRE(a.sims[i].rejected == b.sims[i].rejected);
        REQUIRE(a.sims[i].selected_tau == b.sims[i].selected_tau);
    }

    cfg.alternative = {0, 0, 1.0};
    cfg.fixed_tau = 0.8;
    const FdaReport power = run_fda_experiment(cfg);
    CHECK(power.rejection_rate == 1.0);
    CHECK(power.selected_tau_histogram.size() == 1);

    cfg.n = 1;
    CHECK_THROWS_AS(run_fda_experiment(cfg), ValidationError);
}
