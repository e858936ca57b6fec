#include <catch_amalgamated.hpp>

#include "psboot/error.hpp"
#include "psboot/sci.hpp"

#include <cmath>

using namespace psboot;
using Catch::Approx;

namespace {

SampleMatrix sample(std::size_t p, std::size_t n, std::uint64_t seed, double alpha = 0.7)
{
    const CovarianceModel m(power_sigma(p, 1.0, alpha), corr::Autoregressive{0.3});
    return generate_sample(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)), m, n, Noise::Gaussian, seed);
}

}  // namespace

TEST_CASE("interval formula and widths")
{
    const SampleMatrix x = sample(8, 40, 1);
    const double tau = 0.6;
    const SciSet s = build_sci(x, tau, 500, 0.1, 3);
    const ColumnMoments mom = column_moments(x);
    REQUIRE(s.size() == 8);
    CHECK(s.q_lo < 0.0);
    CHECK(s.q_hi > 0.0);
    CHECK_FALSE(s.few_draws);
    const double rn = std::sqrt(40.0);
    for (std::size_t k = 0; k < 8; ++k) {
        const auto j = static_cast<Eigen::Index>(k);
        const double scale = std::pow(mom.sigma_hat(j), tau);
        CHECK(s.lo[k] == Approx(mom.mean(j) - s.q_hi * scale / rn));
        CHECK(s.hi[k] == Approx(mom.mean(j) - s.q_lo * scale / rn));
        CHECK(s.width(k) / scale == Approx(s.width(0) / std::pow(mom.sigma_hat(0), tau)).epsilon(1e-12));
        CHECK(s.contains(k, mom.mean(j)));
    }
    CHECK(build_sci(x, tau, 50, 0.1, 3).few_draws);
    CHECK_THROWS_AS(build_sci(x, tau, 500, 0.0, 3), ValidationError);
    CHECK_THROWS_AS(build_sci(x, 1.5, 500, 0.1, 3), ValidationError);
}

TEST_CASE("equal sigma_hat gives equal widths; constant data collapses")
{
    Eigen::MatrixXd m(4, 3);
    m << 1, 2, 3, -1, 0, 1, 1, 2, 3, -1, 0, 1;
    const SciSet s = build_sci(SampleMatrix(m), 0.5, 200, 0.05, 1);
    CHECK(s.width(0) == Approx(s.width(1)));
    CHECK(s.width(1) == Approx(s.width(2)));

    const SciSet c = build_sci(SampleMatrix(Eigen::MatrixXd::Constant(5, 3, 2.5)), 0.5, 200, 0.05, 1);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(c.lo[k] == 2.5);
        CHECK(c.hi[k] == 2.5);
    }
}

TEST_CASE("nesting in the confidence level")
{
    const SampleMatrix x = sample(10, 30, 2);
    const SciSet wide = build_sci(x, 0.8, 1000, 0.01, 7);
    const SciSet narrow = build_sci(x, 0.8, 1000, 0.2, 7);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(wide.lo[k] <= narrow.lo[k]);
        CHECK(wide.hi[k] >= narrow.hi[k]);
    }
}

TEST_CASE("tau selection")
{
    CHECK(default_tau_grid().size() == 11);
    CHECK(default_tau_grid().front() == 0.0);
    CHECK(default_tau_grid().back() == Approx(1.0));

    Eigen::MatrixXd m(4, 3);
    m << 1, 2, 3, -1, 0, 1, 1, 2, 3, -1, 0, 1;  // every sigma_hat = 1
    const std::vector<double> grid{0.3, 0.0, 0.7, 1.0};
    const TauSelection tie = select_tau(SampleMatrix(m), grid, 300, 0.05, 4);
    CHECK(tie.tau_star == 0.0);

    const SampleMatrix x = sample(30, 50, 5, 1.0);
    const auto full = default_tau_grid();
    const TauSelection sel = select_tau(x, full, 400, 0.05, 9);
    REQUIRE(sel.mean_widths.size() == full.size());
    for (double w : sel.mean_widths) CHECK(sel.sci.mean_width() <= w);
    const SciSet direct = build_sci(x, sel.tau_star, 400, 0.05, 9);
    CHECK(direct.lo == sel.sci.lo);
    CHECK(direct.hi == sel.sci.hi);

    ThreadPool pool(3);
    CHECK(select_tau(x, full, 400, 0.05, 9, pool).sci.hi == sel.sci.hi);
    CHECK_THROWS_AS(select_tau(x, std::vector<double>{}, 400, 0.05, 9), ValidationError);
}

TEST_CASE("mean test is the dual of the interval box")
{
    const SampleMatrix x = sample(6, 40, 3);
    const ColumnMoments mom = column_moments(x);
    const MeanTest centered = test_mean(x, mom.mean, 0.5, 500, 0.05, 2);
    CHECK_FALSE(centered.reject);
    CHECK(centered.offending.empty());

    Eigen::VectorXd far = mom.mean;
    far(3) += 1e6;
    const MeanTest shifted = test_mean(x, far, 0.5, 500, 0.05, 2);
    CHECK(shifted.reject);
    REQUIRE(shifted.offending.size() == 1);
    CHECK(shifted.offending[0] == 3);

    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd mu0 = mom.mean;
        for (Eigen::Index j = 0; j < 6; ++j) mu0(j) += 0.3 * rng.normal();
        const MeanTest t = test_mean(x, mu0, 0.5, 200, 0.05, 2);
        bool outside = false;
        for (std::size_t k = 0; k < t.sci.size(); ++k) outside |= !t.sci.contains(k, mu0(static_cast<Eigen::Index>(k)));
        REQUIRE(t.reject == outside);
        REQUIRE(uncovered(t.sci, mu0) == t.offending);
    }
}

TEST_CASE("one-dimensional coverage")
{
    const CovarianceModel m(Eigen::VectorXd::Ones(1), corr::Identity{});
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 2.0);
    int covered = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const auto seed = stream_seed(99, StreamTag::Simulation, static_cast<std::uint64_t>(r));
        const SampleMatrix x = generate_sample(mu, m, 200, Noise::Gaussian, seed);
        covered += build_sci(x, 1.0, 4000, 0.05, seed + 1).contains(0, 2.0);
    }
    const double rate = static_cast<double>(covered) / reps;
    CHECK(rate >= 0.93);
    CHECK(rate <= 0.97);
}

TEST_CASE("small-dimensional simultaneous coverage")
{
    const CovarianceModel m(power_sigma(4, 1.0, 0.5), corr::Autoregressive{0.5});
    const Eigen::VectorXd mu = Eigen::Vector4d(1, -1, 0.5, 0);
    int covered = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const auto seed = stream_seed(5, StreamTag::Simulation, static_cast<std::uint64_t>(r));
        const SampleMatrix x = generate_sample(mu, m, 500, Noise::Gaussian, seed);
        covered += uncovered(build_sci(x, 0.5, 4000, 0.05, seed + 1), mu).empty();
    }
    const double rate = static_cast<double>(covered) / reps;
    CHECK(rate == Approx(0.95).margin(0.02));
}
