#pragma once

#include "psboot/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace psboot {

// ---------------------------------------------------------------------------
// Correlation constructors
// ---------------------------------------------------------------------------

namespace corr {
struct Identity {};
/// R_ij = rho0^|i-j|, rho0 in (0, 1).
struct Autoregressive {
    double rho0;
};
/// R_ij = 1{i=j} + 1{i!=j} / (4 |i-j|^gamma), gamma >= 2.
struct Algebraic {
    double gamma;
};
/// R_ij = (1 - |i-j| / c0)_+, c0 > 0.
struct Banded {
    double c0;
};
/// R_ij = 1{i=j} - sqrt(pi_i pi_j / ((1-pi_i)(1-pi_j))) 1{i!=j}.
struct Multinomial {
    std::vector<double> pi;
};
/// Symmetric, unit diagonal, entries in [-1, 1].
struct Explicit {
    Eigen::MatrixXd matrix;
};
}  // namespace corr

using CorrelationSpec =
    std::variant<corr::Identity, corr::Autoregressive, corr::Algebraic, corr::Banded, corr::Multinomial, corr::Explicit>;

const char* kind_name(const CorrelationSpec& spec);

/// Realises the p x p correlation matrix. Throws ValidationError for
/// parameters out of range or a dimension that does not fit the spec.
Eigen::MatrixXd build_correlation(const CorrelationSpec& spec, std::size_t p);

/// sigma_j = c * j^{-alpha}, j = 1..p.
Eigen::VectorXd power_sigma(std::size_t p, double c, double alpha);

// ---------------------------------------------------------------------------
// Covariance model and samples
// ---------------------------------------------------------------------------

/// Sigma = D_sigma R D_sigma together with its symmetric square root.
/// Immutable; the square root is computed once at construction (skipped when
/// R is the identity, where Sigma^{1/2} = D_sigma).
class CovarianceModel {
public:
    CovarianceModel(Eigen::VectorXd sigma, CorrelationSpec corr);

    std::size_t p() const { return static_cast<std::size_t>(sigma_.size()); }
    const Eigen::VectorXd& sigma() const { return sigma_; }
    const CorrelationSpec& correlation_spec() const { return corr_; }
    bool is_diagonal() const { return !sqrt_; }

    Eigen::MatrixXd correlation() const;
    Eigen::MatrixXd covariance() const;
    /// Dense Sigma^{1/2}; for diagonal models this is materialised on demand.
    Eigen::MatrixXd sqrt_covariance() const;

    /// Sigma^{1/2} z for a single vector or for each column of a block.
    Eigen::VectorXd apply_sqrt(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd apply_sqrt_columns(const Eigen::MatrixXd& z) const;

    /// sigma_(1) >= ... >= sigma_(p).
    Eigen::VectorXd sorted_sigma() const;

private:
    Eigen::VectorXd sigma_;
    CorrelationSpec corr_;
    std::shared_ptr<const Eigen::MatrixXd> sqrt_;
};

/// n x p observation matrix; row i is X_i. All entries finite.
class SampleMatrix {
public:
    explicit SampleMatrix(Eigen::MatrixXd rows);

    std::size_t n() const { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(rows_.cols()); }
    const Eigen::MatrixXd& rows() const { return rows_; }

private:
    Eigen::MatrixXd rows_;
};

/// X_i = mu + Sigma^{1/2} Z_i with i.i.d. standardised noise coordinates.
/// Row i draws from its own stream, so output is bit-identical for a seed.
SampleMatrix generate_sample(const Eigen::VectorXd& mu, const CovarianceModel& model, std::size_t n, Noise noise,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Structural diagnostics
// ---------------------------------------------------------------------------

/// max_j j^{1/r} |v|_(j).
double weak_lr_norm(const Eigen::VectorXd& v, double r);

/// tr(S) / ||S||_op.
double effective_rank(const Eigen::MatrixXd& s);

struct TheoryIndices {
    std::size_t ell_n;
    std::size_t k_n;
};
inline constexpr double kDefaultTheoryA = 0.25;
TheoryIndices theory_indices(std::size_t n, std::size_t p, double a = kDefaultTheoryA);

/// Which top-variance block the correlation checks look at.
struct EllChoice {
    std::size_t n = 0;  // sample size used for ell_n / k_n (0: take it from the sample)
    double a = kDefaultTheoryA;
    std::optional<std::size_t> ell_override;
};

struct CorrelationChecks {
    double max_offdiag = 0.0;         // max_{i != j} R_ij(ell)
    double positive_offdiag_sum = 0;  // sum_{i<j} R+_ij(ell)
    bool r_plus_psd = true;
};

struct DecayDiagnostics {
    Eigen::VectorXd sorted_sigma;
    double alpha_hat = 0.0;
    bool alpha_degenerate = false;
    double effective_rank = 1.0;
    std::size_t ell_n = 1;
    std::size_t k_n = 1;
    std::size_t ell_used = 1;
    CorrelationChecks corr_checks;
};

DecayDiagnostics decay_diagnostics(const CovarianceModel& model, const EllChoice& ell);
DecayDiagnostics decay_diagnostics(const SampleMatrix& x, EllChoice ell = {});

/// Negative OLS slope of log sigma_(j) on log j over j = 2..p. Nonpositive
/// entries are excluded. Sets `degenerate` when fewer than two usable
/// points remain or the profile is constant.
double fit_decay_exponent(const Eigen::VectorXd& sorted_sigma, bool* degenerate = nullptr);

/// Sum_{k <= 10^6} k^{-x} plus the integral tail bound; an upper bound on
/// zeta(x). Requires x > 1.001.
double zeta_upper(double x);

struct SchurHornResult {
    double lhs;
    double rhs;
    bool holds;
};

/// ||diag(A)||_{w l_s} against zeta(s/r)^{1/s} ||lambda(A)||_{w l_r}.
SchurHornResult schur_horn_check(const Eigen::MatrixXd& a, double r, double s);

}  // namespace psboot
