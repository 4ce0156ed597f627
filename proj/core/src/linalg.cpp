#include "droplet/linalg.hpp"

#include <algorithm>
#include <vector>

#include <lapacke.h>

#include "droplet/error.hpp"

namespace droplet::linalg {

SymmetricEigen symmetric_eigen(Eigen::MatrixXd a, bool want_vectors,
                               std::optional<std::pair<double, double>> range, int sector) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw InvalidArgument("symmetric_eigen: matrix is not square");
  SymmetricEigen out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z;
  if (want_vectors) z.resize(n, n);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const char jobz = want_vectors ? 'V' : 'N';
  const char which = range ? 'V' : 'A';
  const double vl = range ? range->first : 0.0;
  const double vu = range ? range->second : 0.0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, which, 'L', n, a.data(), n, vl, vu, 0, 0, 0.0, &found,
                     w.data(), want_vectors ? z.data() : nullptr, n, isuppz.data());
  if (info != 0) {
    throw ConvergenceError("dsyevr failed with info=" + std::to_string(info), sector);
  }
  out.values = w.head(found);
  if (want_vectors) out.vectors = z.leftCols(found);
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  Eigen::VectorXd s(k);
  if (k == 0) return s;
  Eigen::MatrixXcd work = a;
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, reinterpret_cast<lapack_complex_double*>(work.data()),
                     m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw ConvergenceError("zgesdd failed with info=" + std::to_string(info), -1);
  return s;
}

double operator_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

double trace_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a).sum();
}

double frobenius_norm(const Eigen::MatrixXcd& a) { return a.norm(); }

double trace_norm_low_rank(const Eigen::MatrixXcd& left, const Eigen::VectorXcd& weights,
                           const Eigen::MatrixXcd& right) {
  if (left.cols() != weights.size() || right.cols() != weights.size()) {
    throw InvalidArgument("trace_norm_low_rank: column mismatch");
  }
  const Eigen::Index k = weights.size();
  if (k == 0 || left.rows() == 0 || right.rows() == 0) return 0.0;
  // left = Q1 R1, right = Q2 R2  =>  left W right^* = Q1 (R1 W R2^*) Q2^*.
  auto r_factor = [](const Eigen::MatrixXcd& m) -> Eigen::MatrixXcd {
    if (m.rows() <= m.cols()) return m;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  };
  const Eigen::MatrixXcd r1 = r_factor(left);
  const Eigen::MatrixXcd r2 = r_factor(right);
  const Eigen::MatrixXcd core = r1 * weights.asDiagonal() * r2.adjoint();
  return trace_norm(core);
}

}  // namespace droplet::linalg
