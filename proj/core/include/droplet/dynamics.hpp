#pragma once

#include <vector>

#include <Eigen/Dense>

#include "droplet/spectral.hpp"

namespace droplet {

/// T(left, right) = <right, .> left. Coordinates are those of the window
/// basis the term was built from.
struct RankOneTerm {
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;

  Eigen::MatrixXcd matrix() const { return left * right.adjoint(); }
  double norm() const { return left.norm() * right.norm(); }
};

/// {0} plus 64 linear points in (0, 100] plus 64 log-spaced points in
/// [1e-2, 1e3], sorted and deduplicated.
std::vector<double> default_time_grid();

/// tau_t(X) = e^{itH} X e^{-itH}; needs the complete spectrum with vectors.
BlockOperator heisenberg(const SpectralData& sd, const Observable& x, double t);
/// tau^B_t(X) = e^{itH_B} X e^{-itH_B} with H_B = P_B H.
BlockOperator heisenberg_truncated(const SpectralData& sd, const Observable& x, double t,
                                   const EnergyWindow& b);

/// e^{itE} for the window energies.
Eigen::VectorXcd phases(const WindowBasis& b, double t);
/// tau_t acting on a window-basis matrix: D M D^*.
Eigen::MatrixXcd evolve(const WindowBasis& b, const Eigen::MatrixXcd& m, double t);

/// R_B(X, Y) = P_B X (1 - P_B) Y P_B.
WindowedOperator correlator(const WindowBasis& b, const Observable& x, const Observable& y);

/// Window-basis data for a pair of observables, reused across many times.
struct PairData {
  Eigen::MatrixXcd mx, my;    // X_W, Y_W
  Eigen::MatrixXcd mxy, myx;  // (XY)_W, (YX)_W
  Eigen::VectorXcd x_psi0;    // P_W X psi_0
  Eigen::VectorXcd xs_psi0;   // P_W X^* psi_0
  Eigen::VectorXcd y_psi0;    // P_W Y psi_0
  Eigen::VectorXcd ys_psi0;   // P_W Y^* psi_0
};

PairData pair_data(const WindowBasis& b, const Observable& x, const Observable& y);

/// (tau_t(X) P_0 Y)_W = T(P_W e^{itH} X psi_0, P_W Y^* psi_0).
RankOneTerm counterterm(const WindowBasis& b, const PairData& p, double t);
RankOneTerm counterterm(const WindowBasis& b, const Observable& x, const Observable& y, double t);
/// (Y P_0 tau_t(X))_W = T(P_W Y psi_0, P_W e^{itH} X^* psi_0).
RankOneTerm counterterm_reversed(const WindowBasis& b, const PairData& p, double t);

/// [[tau^K_t(X), Y]] compressed to the window K of `b`.
WindowedOperator double_bracket(const WindowBasis& b, const PairData& p, double t);
WindowedOperator double_bracket(const WindowBasis& b, const Observable& x, const Observable& y, double t);

}  // namespace droplet
