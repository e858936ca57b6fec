#include "psboot/linalg.hpp"

#include "psboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace psboot {

namespace {
double op_norm_from(const Eigen::VectorXd& eigenvalues)
{
    return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}
}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& s)
{
    detail::require(s.rows() == s.cols(), "matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    return solver.eigenvalues();
}

bool is_psd(const Eigen::MatrixXd& s)
{
    const Eigen::VectorXd ev = symmetric_eigenvalues(s);
    if (ev.size() == 0) return true;
    return ev.minCoeff() >= -kPsdRelTol * op_norm_from(ev);
}

bool is_symmetric(const Eigen::MatrixXd& s, double tol)
{
    if (s.rows() != s.cols()) return false;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > tol) return false;
    return true;
}

Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& s)
{
    detail::require(s.rows() == s.cols(), "matrix_sqrt: matrix must be square");
    detail::require(is_symmetric(s, 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff())),
                    "matrix_sqrt: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

    Eigen::VectorXd ev = solver.eigenvalues();
    const double tol = kPsdRelTol * op_norm_from(ev);
    if (ev.size() > 0 && ev.minCoeff() < -tol)
        throw NotPsdError("matrix is not positive semi-definite (lambda_min = " +
                          std::to_string(ev.minCoeff()) + ")");
    ev = ev.cwiseMax(0.0).cwiseSqrt();

    const Eigen::MatrixXd& v = solver.eigenvectors();
    Eigen::MatrixXd root = v * ev.asDiagonal() * v.transpose();
    return 0.5 * (root + root.transpose());
}

LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    detail::require(x.size() == y.size() && x.size() >= 2, "fit_line needs at least two points");
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double syy = (y.array() - my).square().sum();
    detail::require(sxx > 0.0, "fit_line needs distinct abscissae");

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace psboot
