#pragma once

#include <complex>
#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace droplet {

using cplx = std::complex<double>;

namespace linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns; empty when vectors were not requested
};

/// Dense real-symmetric eigensolver (LAPACK dsyevr). With `range` only the
/// eigenpairs in the half-open interval (range->first, range->second] are
/// returned. `sector` is reported in the ConvergenceError on failure.
SymmetricEigen symmetric_eigen(Eigen::MatrixXd a, bool want_vectors,
                               std::optional<std::pair<double, double>> range = std::nullopt,
                               int sector = -1);

/// Singular values in descending order (LAPACK zgesdd, values only).
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& a);

double operator_norm(const Eigen::MatrixXcd& a);
double trace_norm(const Eigen::MatrixXcd& a);
double frobenius_norm(const Eigen::MatrixXcd& a);

/// Trace norm of left * diag(weights) * right^* without forming the
/// (possibly huge) product; left and right are tall with matching columns.
double trace_norm_low_rank(const Eigen::MatrixXcd& left, const Eigen::VectorXcd& weights,
                           const Eigen::MatrixXcd& right);

}  // namespace linalg
}  // namespace droplet
