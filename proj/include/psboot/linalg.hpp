#pragma once

#include <Eigen/Dense>

namespace psboot {

/// Relative tolerance below which negative eigenvalues count as rounding
/// noise: eigenvalues in [-kPsdRelTol * ||S||_op, 0) are clipped to zero.
inline constexpr double kPsdRelTol = 1e-10;

/// Symmetric square root via eigendecomposition with clipping.
/// Throws NotPsdError if lambda_min(S) < -kPsdRelTol * ||S||_op.
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& s);

/// Ascending eigenvalues of a symmetric matrix.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& s);

/// lambda_min(S) >= -kPsdRelTol * ||S||_op.
bool is_psd(const Eigen::MatrixXd& s);

bool is_symmetric(const Eigen::MatrixXd& s, double tol = 0.0);

/// Ordinary least squares of y on x with intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace psboot
