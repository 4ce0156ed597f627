#pragma once

// Independent reference constructions used by the test suites. Everything here
// is built from Kronecker products of Pauli matrices and dense linear algebra,
// without going through the library's sector machinery.

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "droplet/spin_core.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

inline MatrixXcd pauli(char which) {
  MatrixXcd m(2, 2);
  if (which == 'x') m << 0, 1, 1, 0;
  if (which == 'y') m << 0, cplx(0, -1), cplx(0, 1), 0;
  if (which == 'z') m << 1, 0, 0, -1;
  if (which == 'i') m << 1, 0, 0, 1;
  return m;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Single-site operator on bit k of an n-site register (bit 0 least significant).
inline MatrixXcd site_op(const MatrixXcd& op, int k, int n) {
  const MatrixXcd left = MatrixXcd::Identity(Eigen::Index{1} << (n - 1 - k), Eigen::Index{1} << (n - 1 - k));
  const MatrixXcd right = MatrixXcd::Identity(Eigen::Index{1} << k, Eigen::Index{1} << k);
  return kron(kron(left, op), right);
}

/// Down-spin number operator (1 - sigma^z) / 2 on bit k.
inline MatrixXcd number(int k, int n) {
  const auto dim = Eigen::Index{1} << n;
  return 0.5 * (MatrixXcd::Identity(dim, dim) - site_op(pauli('z'), k, n));
}

/// Dense H on 2L+1 sites straight from the definition:
/// sum of 1/4 (1 - ZZ) - 1/(4 Delta) (XX + YY), plus lambda omega_i N_i, plus beta (N_-L + N_L).
inline MatrixXcd hamiltonian(int half_length, double delta, double lambda, double beta,
                             const Eigen::VectorXd& omega) {
  const int n = 2 * half_length + 1;
  const auto dim = Eigen::Index{1} << n;
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  const MatrixXcd id = MatrixXcd::Identity(dim, dim);
  for (int k = 0; k + 1 < n; ++k) {
    const MatrixXcd zz = site_op(pauli('z'), k, n) * site_op(pauli('z'), k + 1, n);
    const MatrixXcd xx = site_op(pauli('x'), k, n) * site_op(pauli('x'), k + 1, n);
    const MatrixXcd yy = site_op(pauli('y'), k, n) * site_op(pauli('y'), k + 1, n);
    h += 0.25 * (id - zz) - (0.25 / delta) * (xx + yy);
  }
  for (int k = 0; k < n; ++k) h += lambda * omega(k) * number(k, n);
  h += beta * (number(0, n) + number(n - 1, n));
  return h;
}

/// Random complex matrix with operator norm of order one.
inline MatrixXcd random_matrix(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m / std::sqrt(static_cast<double>(dim));
}

/// Random observable on a random interval of at most `max_len` sites.
inline droplet::Observable random_observable(int half_length, int max_len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len_d(1, max_len);
  const int len = len_d(rng);
  std::uniform_int_distribution<int> lo_d(-half_length, half_length - len + 1);
  const int lo = lo_d(rng);
  return droplet::Observable(half_length, {lo, lo + len - 1}, random_matrix(Eigen::Index{1} << len, rng));
}

inline double trace_norm(const MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return svd.singularValues().sum();
}

inline double op_norm(const MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace oracle
