#include "droplet/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "droplet/error.hpp"

namespace droplet {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void require_complete(const SpectralData& sd, const char* who) {
  if (!sd.complete || !sd.has_vectors) {
    throw InvalidArgument(std::string(who) + ": needs the complete spectrum with eigenvectors");
  }
}

// Per-sector unitary U_N = V diag(w) V^T.
MatrixXcd sector_function(const SectorSpectrum& s, const VectorXcd& w) {
  const MatrixXcd v = s.vectors.cast<cplx>();
  return v * w.asDiagonal() * v.transpose();
}

BlockOperator conjugate(const Observable& x, const std::vector<MatrixXcd>& u) {
  const BlockOperator xb = x.block_operator();
  BlockOperator out(x.n_sites());
  for (const auto& [key, m] : xb.blocks()) {
    out.set_block(key.first, key.second, u[key.first] * m * u[key.second].adjoint());
  }
  return out;
}

MatrixXcd ground_column(const WindowBasis& b) {
  MatrixXcd psi0 = MatrixXcd::Zero(b.vectors.rows(), 1);
  psi0(0, 0) = 1.0;
  return psi0;
}

}  // namespace

std::vector<double> default_time_grid() {
  std::vector<double> grid{0.0};
  for (int k = 1; k <= 64; ++k) grid.push_back(100.0 * k / 64.0);
  for (int k = 0; k < 64; ++k) grid.push_back(std::pow(10.0, -2.0 + 5.0 * k / 63.0));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double c) { return std::abs(a - c) <= 1e-12 * std::max(1.0, a); }),
             grid.end());
  return grid;
}

BlockOperator heisenberg(const SpectralData& sd, const Observable& x, double t) {
  require_complete(sd, "heisenberg");
  std::vector<MatrixXcd> u;
  for (const auto& s : sd.sectors) {
    const VectorXcd w = (cplx(0.0, t) * s.values.cast<cplx>()).array().exp();
    u.push_back(sector_function(s, w));
  }
  return conjugate(x, u);
}

BlockOperator heisenberg_truncated(const SpectralData& sd, const Observable& x, double t,
                                   const EnergyWindow& b) {
  require_complete(sd, "heisenberg_truncated");
  std::vector<MatrixXcd> u;
  for (const auto& s : sd.sectors) {
    // e^{itH_B} = 1 + P_B (e^{itH} - 1).
    VectorXcd w(s.values.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      w(k) = b.contains(s.values(k)) ? std::exp(cplx(0.0, t * s.values(k))) - 1.0 : cplx(0.0);
    }
    const auto d = s.vectors.rows();
    u.push_back(MatrixXcd::Identity(d, d) + sector_function(s, w));
  }
  return conjugate(x, u);
}

VectorXcd phases(const WindowBasis& b, double t) {
  return (cplx(0.0, t) * b.energies.cast<cplx>()).array().exp();
}

MatrixXcd evolve(const WindowBasis& b, const MatrixXcd& m, double t) {
  const VectorXcd d = phases(b, t);
  return d.asDiagonal() * m * d.conjugate().asDiagonal();
}

WindowedOperator correlator(const WindowBasis& b, const Observable& x, const Observable& y) {
  if (b.size() == 0) return {b.window, MatrixXcd(0, 0), b.energies};
  const MatrixXcd yv = y.apply(b.vectors);
  const MatrixXcd vt = b.vectors.transpose().cast<cplx>();
  const MatrixXcd xyv = x.apply(yv);
  const MatrixXcd m = vt * xyv - (vt * x.apply(b.vectors)) * (vt * yv);
  return {b.window, m, b.energies};
}

PairData pair_data(const WindowBasis& b, const Observable& x, const Observable& y) {
  PairData p;
  const MatrixXcd vt = b.vectors.transpose().cast<cplx>();
  const MatrixXcd xv = x.apply(b.vectors);
  const MatrixXcd yv = y.apply(b.vectors);
  p.mx = vt * xv;
  p.my = vt * yv;
  p.mxy = vt * x.apply(yv);
  p.myx = vt * y.apply(xv);
  const MatrixXcd psi0 = ground_column(b);
  p.x_psi0 = vt * x.apply(psi0);
  p.xs_psi0 = vt * x.adjoint().apply(psi0);
  p.y_psi0 = vt * y.apply(psi0);
  p.ys_psi0 = vt * y.adjoint().apply(psi0);
  return p;
}

RankOneTerm counterterm(const WindowBasis& b, const PairData& p, double t) {
  return {phases(b, t).cwiseProduct(p.x_psi0), p.ys_psi0};
}

RankOneTerm counterterm(const WindowBasis& b, const Observable& x, const Observable& y, double t) {
  return counterterm(b, pair_data(b, x, y), t);
}

RankOneTerm counterterm_reversed(const WindowBasis& b, const PairData& p, double t) {
  return {p.y_psi0, phases(b, t).cwiseProduct(p.xs_psi0)};
}

WindowedOperator double_bracket(const WindowBasis& b, const PairData& p, double t) {
  const VectorXcd d = phases(b, t);
  const auto D = d.asDiagonal();
  const auto Dc = d.conjugate().asDiagonal();
  const auto w = b.size();
  const MatrixXcd one = MatrixXcd::Identity(w, w);
  const MatrixXcd dm1 = MatrixXcd(D) - one;
  const MatrixXcd dcm1 = MatrixXcd(Dc) - one;
  // P_K tau^K_t(X) Y P_K and P_K Y tau^K_t(X) P_K; the truncated evolution
  // only rotates phases inside K, so both reduce to window matrices.
  const MatrixXcd txy = D * p.mxy + D * p.mx * dcm1 * p.my;
  const MatrixXcd ytx = p.myx * Dc + p.my * dm1 * p.mx * Dc;
  MatrixXcd m = txy - ytx;
  // tau^K_t leaves psi_0 invariant, so every counterterm is rank one.
  const VectorXcd dx = d.cwiseProduct(p.x_psi0);
  const VectorXcd dy = d.cwiseProduct(p.y_psi0);
  const VectorXcd dxs = d.cwiseProduct(p.xs_psi0);
  const VectorXcd dys = d.cwiseProduct(p.ys_psi0);
  m -= dx * p.ys_psi0.adjoint() + dy * p.xs_psi0.adjoint();
  m += p.y_psi0 * dxs.adjoint() + p.x_psi0 * dys.adjoint();
  return {b.window, m, b.energies};
}

WindowedOperator double_bracket(const WindowBasis& b, const Observable& x, const Observable& y, double t) {
  return double_bracket(b, pair_data(b, x, y), t);
}

}  // namespace droplet
