#include "psboot/model.hpp"

#include "psboot/error.hpp"
#include "psboot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace psboot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_probability_vector(const std::vector<double>& pi)
{
    detail::require(!pi.empty(), "probability vector must be nonempty");
    double total = 0.0;
    for (double v : pi) {
        detail::require(std::isfinite(v) && v >= 0.0, "probabilities must be finite and nonnegative");
        total += v;
    }
    detail::require(std::abs(total - 1.0) <= 1e-12 * static_cast<double>(pi.size()),
                    "probabilities must sum to one");
}

// Indices of the d largest entries, ties broken by lower index.
std::vector<Eigen::Index> top_indices(const Eigen::VectorXd& sigma, std::size_t d)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(sigma.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return sigma[a] > sigma[b]; });
    idx.resize(std::min(d, idx.size()));
    return idx;
}

CorrelationChecks correlation_checks(const Eigen::MatrixXd& r)
{
    CorrelationChecks checks;
    const Eigen::Index d = r.rows();
    Eigen::MatrixXd r_plus = r.cwiseMax(0.0);
    checks.max_offdiag = d > 1 ? -1.0 : 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            checks.max_offdiag = std::max(checks.max_offdiag, r(i, j));
            checks.positive_offdiag_sum += r_plus(i, j);
        }
    }
    checks.r_plus_psd = is_psd(r_plus);
    return checks;
}

}  // namespace

const char* kind_name(const CorrelationSpec& spec)
{
    return std::visit(overloaded{
                          [](const corr::Identity&) { return "identity"; },
                          [](const corr::Autoregressive&) { return "autoregressive"; },
                          [](const corr::Algebraic&) { return "algebraic"; },
                          [](const corr::Banded&) { return "banded"; },
                          [](const corr::Multinomial&) { return "multinomial"; },
                          [](const corr::Explicit&) { return "explicit"; },
                      },
                      spec);
}

Eigen::MatrixXd build_correlation(const CorrelationSpec& spec, std::size_t p)
{
    detail::require(p >= 1, "dimension must be at least 1");
    const auto dim = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(dim, dim);

    auto fill_toeplitz = [&](auto&& entry) {
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = i + 1; j < dim; ++j) r(i, j) = r(j, i) = entry(static_cast<double>(j - i));
    };

    std::visit(overloaded{
                   [](const corr::Identity&) {},
                   [&](const corr::Autoregressive& s) {
                       detail::require(s.rho0 > 0.0 && s.rho0 < 1.0, "autoregressive rho0 must lie in (0, 1)");
                       fill_toeplitz([&](double lag) { return std::pow(s.rho0, lag); });
                   },
                   [&](const corr::Algebraic& s) {
                       detail::require(s.gamma >= 2.0, "algebraic gamma must be at least 2");
                       fill_toeplitz([&](double lag) { return 1.0 / (4.0 * std::pow(lag, s.gamma)); });
                   },
                   [&](const corr::Banded& s) {
                       detail::require(s.c0 > 0.0, "banded c0 must be positive");
                       fill_toeplitz([&](double lag) { return std::max(0.0, 1.0 - lag / s.c0); });
                   },
                   [&](const corr::Multinomial& s) {
                       detail::require(s.pi.size() == p, "multinomial correlation: pi has wrong length");
                       validate_probability_vector(s.pi);
                       for (Eigen::Index i = 0; i < dim; ++i) {
                           for (Eigen::Index j = i + 1; j < dim; ++j) {
                               const double pi_i = s.pi[static_cast<std::size_t>(i)];
                               const double pi_j = s.pi[static_cast<std::size_t>(j)];
                               const double denom = (1.0 - pi_i) * (1.0 - pi_j);
                               // A degenerate cell (pi = 0 or 1) is uncorrelated with the rest.
                               const double v = denom > 0.0 ? -std::sqrt(pi_i * pi_j / denom) : 0.0;
                               r(i, j) = r(j, i) = v;
                           }
                       }
                   },
                   [&](const corr::Explicit& s) {
                       detail::require(s.matrix.rows() == dim && s.matrix.cols() == dim,
                                       "explicit correlation has wrong shape");
                       detail::require(s.matrix.allFinite(), "explicit correlation has non-finite entries");
                       detail::require(is_symmetric(s.matrix, 1e-12), "explicit correlation must be symmetric");
                       for (Eigen::Index i = 0; i < dim; ++i)
                           detail::require(std::abs(s.matrix(i, i) - 1.0) <= 1e-12,
                                           "explicit correlation must have unit diagonal");
                       detail::require(s.matrix.cwiseAbs().maxCoeff() <= 1.0 + 1e-12,
                                       "explicit correlation entries must lie in [-1, 1]");
                       r = 0.5 * (s.matrix + s.matrix.transpose());
                       r.diagonal().setOnes();
                   },
               },
               spec);
    return r;
}

Eigen::VectorXd power_sigma(std::size_t p, double c, double alpha)
{
    detail::require(p >= 1, "dimension must be at least 1");
    detail::require(c > 0.0 && std::isfinite(c), "sigma scale must be positive");
    detail::require(alpha >= 0.0 && std::isfinite(alpha), "decay exponent must be nonnegative");
    Eigen::VectorXd sigma(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < sigma.size(); ++j) sigma[j] = c * std::pow(static_cast<double>(j + 1), -alpha);
    return sigma;
}

// ---------------------------------------------------------------------------

CovarianceModel::CovarianceModel(Eigen::VectorXd sigma, CorrelationSpec corr)
    : sigma_(std::move(sigma)), corr_(std::move(corr))
{
    detail::require(sigma_.size() >= 1, "covariance model needs p >= 1");
    for (Eigen::Index j = 0; j < sigma_.size(); ++j)
        detail::require(std::isfinite(sigma_[j]) && sigma_[j] > 0.0, "standard deviations must be positive");

    const Eigen::MatrixXd r = build_correlation(corr_, p());
    const bool diagonal = r.isDiagonal(0.0);
    if (!diagonal) sqrt_ = std::make_shared<const Eigen::MatrixXd>(matrix_sqrt(sigma_.asDiagonal() * r * sigma_.asDiagonal()));
}

Eigen::MatrixXd CovarianceModel::correlation() const { return build_correlation(corr_, p()); }

Eigen::MatrixXd CovarianceModel::covariance() const
{
    return sigma_.asDiagonal() * correlation() * sigma_.asDiagonal();
}

Eigen::MatrixXd CovarianceModel::sqrt_covariance() const
{
    if (sqrt_) return *sqrt_;
    return sigma_.asDiagonal();
}

Eigen::VectorXd CovarianceModel::apply_sqrt(const Eigen::VectorXd& z) const
{
    detail::require(z.size() == sigma_.size(), "apply_sqrt: dimension mismatch");
    if (sqrt_) return (*sqrt_) * z;
    return sigma_.cwiseProduct(z);
}

Eigen::MatrixXd CovarianceModel::apply_sqrt_columns(const Eigen::MatrixXd& z) const
{
    detail::require(z.rows() == sigma_.size(), "apply_sqrt: dimension mismatch");
    if (sqrt_) return (*sqrt_) * z;
    return sigma_.asDiagonal() * z;
}

Eigen::VectorXd CovarianceModel::sorted_sigma() const
{
    Eigen::VectorXd s = sigma_;
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
}

SampleMatrix::SampleMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows))
{
    detail::require(rows_.rows() >= 1 && rows_.cols() >= 1, "sample matrix needs n >= 1 and p >= 1");
    detail::require(rows_.allFinite(), "sample matrix has non-finite entries");
}

SampleMatrix generate_sample(const Eigen::VectorXd& mu, const CovarianceModel& model, std::size_t n, Noise noise,
                             std::uint64_t seed)
{
    detail::require(static_cast<std::size_t>(mu.size()) == model.p(), "mean vector has wrong dimension");
    detail::require(n >= 1, "sample size must be at least 1");
    const auto p = static_cast<Eigen::Index>(model.p());

    // Column i of z holds Z_i; row-wise streams keep rows independent of n.
    Eigen::MatrixXd z(p, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
        Rng rng(seed, StreamTag::SampleRow, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < p; ++j) z(j, i) = draw_noise(noise, rng);
    }
    Eigen::MatrixXd x = model.apply_sqrt_columns(z).transpose();
    x.rowwise() += mu.transpose();
    return SampleMatrix(std::move(x));
}

// ---------------------------------------------------------------------------

double weak_lr_norm(const Eigen::VectorXd& v, double r)
{
    detail::require(v.size() >= 1, "weak_lr_norm: empty vector");
    detail::require(r > 0.0 && std::isfinite(r), "weak_lr_norm: r must be positive");
    std::vector<double> a(v.data(), v.data() + v.size());
    for (double& x : a) x = std::abs(x);
    std::sort(a.begin(), a.end(), std::greater<>());
    double best = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        best = std::max(best, std::pow(static_cast<double>(j + 1), 1.0 / r) * a[j]);
    return best;
}

double effective_rank(const Eigen::MatrixXd& s)
{
    detail::require(s.rows() == s.cols() && s.rows() >= 1, "effective_rank: matrix must be square");
    const Eigen::VectorXd ev = symmetric_eigenvalues(s);
    const double op = ev.cwiseAbs().maxCoeff();
    detail::require(op > 0.0, "effective_rank: zero matrix");
    return s.trace() / op;
}

TheoryIndices theory_indices(std::size_t n, std::size_t p, double a)
{
    detail::require(n >= 2, "theory_indices: n must be at least 2");
    detail::require(p >= 1, "theory_indices: p must be at least 1");
    detail::require(a > 0.0 && a < 0.5, "theory_indices: a must lie in (0, 1/2)");
    const double log_n = std::log(static_cast<double>(n));
    const double dp = static_cast<double>(p);
    const double ell = std::ceil(std::min(std::max(1.0, log_n * log_n * log_n), dp));
    const double growth = std::pow(static_cast<double>(n), 1.0 / std::pow(log_n, a));
    const double k = std::ceil(std::min(std::max(ell, growth), dp));
    return {static_cast<std::size_t>(ell), static_cast<std::size_t>(k)};
}

double fit_decay_exponent(const Eigen::VectorXd& sorted_sigma, bool* degenerate)
{
    const auto p = sorted_sigma.size();
    const Eigen::Index first = p >= 3 ? 1 : 0;
    std::vector<double> lx, ly;
    for (Eigen::Index j = first; j < p; ++j) {
        if (sorted_sigma[j] > 0.0) {
            lx.push_back(std::log(static_cast<double>(j + 1)));
            ly.push_back(std::log(sorted_sigma[j]));
        }
    }
    const bool constant = p == 0 || sorted_sigma.maxCoeff() == sorted_sigma.minCoeff();
    if (lx.size() < 2 || constant) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    const LineFit fit = fit_line(Eigen::Map<Eigen::VectorXd>(lx.data(), static_cast<Eigen::Index>(lx.size())),
                                 Eigen::Map<Eigen::VectorXd>(ly.data(), static_cast<Eigen::Index>(ly.size())));
    return -fit.slope;
}

namespace {

std::size_t resolve_ell(const EllChoice& ell, std::size_t p, TheoryIndices idx)
{
    if (ell.ell_override) {
        detail::require(*ell.ell_override >= 1 && *ell.ell_override <= p, "ell override must lie in [1, p]");
        return *ell.ell_override;
    }
    return idx.ell_n;
}

}  // namespace

DecayDiagnostics decay_diagnostics(const CovarianceModel& model, const EllChoice& ell)
{
    detail::require(ell.n >= 2, "decay_diagnostics: a sample size n >= 2 is required for a model");
    DecayDiagnostics out;
    out.sorted_sigma = model.sorted_sigma();
    out.alpha_hat = fit_decay_exponent(out.sorted_sigma, &out.alpha_degenerate);

    if (model.is_diagonal()) {
        out.effective_rank = model.sigma().squaredNorm() / model.sigma().array().square().maxCoeff();
    } else {
        out.effective_rank = effective_rank(model.covariance());
    }

    const TheoryIndices idx = theory_indices(ell.n, model.p(), ell.a);
    out.ell_n = idx.ell_n;
    out.k_n = idx.k_n;
    out.ell_used = resolve_ell(ell, model.p(), idx);

    const auto top = top_indices(model.sigma(), out.ell_used);
    const Eigen::MatrixXd r = model.correlation();
    out.corr_checks = correlation_checks(r(top, top));
    return out;
}

DecayDiagnostics decay_diagnostics(const SampleMatrix& x, EllChoice ell)
{
    detail::require(x.n() >= 2, "decay_diagnostics: sample needs n >= 2");
    if (ell.n == 0) ell.n = x.n();

    const Eigen::MatrixXd centered = x.rows().rowwise() - x.rows().colwise().mean();
    const double inv_n = 1.0 / static_cast<double>(x.n());
    const Eigen::VectorXd sigma_hat = (centered.colwise().squaredNorm() * inv_n).cwiseSqrt().transpose();

    DecayDiagnostics out;
    out.sorted_sigma = sigma_hat;
    std::sort(out.sorted_sigma.data(), out.sorted_sigma.data() + out.sorted_sigma.size(), std::greater<>());
    out.alpha_hat = fit_decay_exponent(out.sorted_sigma, &out.alpha_degenerate);

    // Nonzero spectrum of the sample covariance through the smaller Gram matrix.
    const Eigen::MatrixXd gram = x.n() < x.p() ? Eigen::MatrixXd(centered * centered.transpose() * inv_n)
                                               : Eigen::MatrixXd(centered.transpose() * centered * inv_n);
    out.effective_rank = effective_rank(gram);

    const TheoryIndices idx = theory_indices(ell.n, x.p(), ell.a);
    out.ell_n = idx.ell_n;
    out.k_n = idx.k_n;
    out.ell_used = resolve_ell(ell, x.p(), idx);

    const auto top = top_indices(sigma_hat, out.ell_used);
    const Eigen::MatrixXd block = centered(Eigen::all, top);
    Eigen::MatrixXd r = block.transpose() * block * inv_n;
    const double max_sd = sigma_hat.maxCoeff();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const double si = sigma_hat[top[static_cast<std::size_t>(i)]];
            const double sj = sigma_hat[top[static_cast<std::size_t>(j)]];
            const bool degenerate = si <= 1e-12 * max_sd || sj <= 1e-12 * max_sd;
            r(i, j) = i == j ? 1.0 : (degenerate ? 0.0 : std::clamp(r(i, j) / (si * sj), -1.0, 1.0));
        }
    }
    out.corr_checks = correlation_checks(r);
    return out;
}

// ---------------------------------------------------------------------------

double zeta_upper(double x)
{
    detail::require(x > 1.001 && std::isfinite(x), "zeta_upper: argument must exceed 1.001");
    constexpr std::size_t kTerms = 1'000'000;
    static const std::vector<double> log_k = [] {
        std::vector<double> v(kTerms);
        for (std::size_t k = 0; k < kTerms; ++k) v[k] = std::log(static_cast<double>(k + 1));
        return v;
    }();
    // Smallest terms first.
    double sum = std::pow(static_cast<double>(kTerms), 1.0 - x) / (x - 1.0);
    for (std::size_t k = kTerms; k-- > 0;) sum += std::exp(-x * log_k[k]);
    return sum;
}

SchurHornResult schur_horn_check(const Eigen::MatrixXd& a, double r, double s)
{
    detail::require(a.rows() == a.cols() && a.rows() >= 1, "schur_horn_check: matrix must be square");
    detail::require(is_symmetric(a, 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())),
                    "schur_horn_check: matrix must be symmetric");
    detail::require(s >= 1.0, "schur_horn_check: s must be at least 1");
    detail::require(r > 0.0 && r < s, "schur_horn_check: r must lie in (0, s)");

    SchurHornResult out{};
    out.lhs = weak_lr_norm(a.diagonal(), s);
    out.rhs = std::pow(zeta_upper(s / r), 1.0 / s) * weak_lr_norm(symmetric_eigenvalues(a), r);
    out.holds = out.lhs <= out.rhs;
    return out;
}

}  // namespace psboot
