#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droplet/dynamics.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

/// Set when a sup over a time grid is attained at the largest grid time.
inline constexpr const char* kFlagSupAtGridEnd = "sup_at_grid_end";

struct DiagnosticPoint {
  std::string name;
  double abscissa = 0.0;
  double value = 0.0;
  std::optional<double> t_star;
  std::vector<std::string> flags;
};

// ---------------------------------------------------------------------------
// Decay fits

enum class DecayModel { exponential, stretched };

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  double alpha = 1.0;  // abscissa exponent (1 for the exponential model)
  double rate = 0.0;   // m in C e^{-m d^alpha}
  double prefactor = 0.0;
  double r_squared = 0.0;
  double rate_stderr = 0.0;
  double log_prefactor_stderr = 0.0;
  int n_points = 0;
  bool floored = false;  // some values were raised to the floor before taking logs
};

constexpr double kFitFloor = 1e-15;

/// Least squares of log(value) against abscissa^alpha.
DecayFit fit_decay(const std::vector<DiagnosticPoint>& points, DecayModel model = DecayModel::exponential,
                   double alpha = 1.0);
DecayFit fit_decay(const std::vector<double>& abscissa, const std::vector<double>& values,
                   DecayModel model = DecayModel::exponential, double alpha = 1.0);

// ---------------------------------------------------------------------------
// Eigenfunction correlators

/// Sum over clusters E in W of ||N_i P_E N_j||_1 (= ||N_i psi_E|| ||N_j psi_E|| for simple E).
double dl_kernel(const SpectralData& sd, int i, int j, const EnergyWindow& w);
double dl_kernel(const WindowBasis& b, const SpectralData& sd, int i, int j);

/// ||A g(H) B||_1 with g taken as zero outside `w`.
double sandwich_norm(const SpectralData& sd, const Observable& a, const std::function<cplx(double)>& g,
                     const Observable& b, const EnergyWindow& w);

// ---------------------------------------------------------------------------
// Non-spreading

/// Precomputed data for ||(X_l(t) - tau_t(X))_{I_0}||_1 at one (X, l).
class NonspreadPlan {
 public:
  NonspreadPlan(const WindowBasis& i0, const Observable& x, int ell);

  double error(double t) const;
  /// Sup over the grid; t_star records the maximizer.
  DiagnosticPoint sup(const std::vector<double>& t_grid) const;
  /// The kept core S_{l/2}, the truncated set T and the support S_l.
  const Interval& core() const { return core_; }
  const Interval& support() const { return support_; }

 private:
  const WindowBasis* basis_;
  int ell_;
  Interval core_;
  Interval support_;
  Eigen::MatrixXcd m_;                     // (X - zeta)_{I_0} in the window basis
  Eigen::MatrixXd v_core_;                 // rows of V with O all up, indexed by core configuration
  std::vector<Eigen::MatrixXd> overlaps_;  // V_O^T W_o for every admissible o
};

double nonspread_error(const WindowBasis& i0, const Observable& x, int ell, double t);
/// X_l(t) as an observable on S_l; dense construction, intended for small chains.
Observable nonspread_observable(const SpectralData& sd, const EnergyWindow& i0, const Observable& x, int ell,
                                double t);

// ---------------------------------------------------------------------------
// Zero-velocity Lieb-Robinson displays

/// sup_t ||[tau_t(X_W), Y_W]||_1 in the window basis of W.
DiagnosticPoint lr_norm(const WindowBasis& w, const PairData& p, const std::vector<double>& t_grid);

struct CountertermResidual {
  DiagnosticPoint with_counterterms;  // sup_t ||[tau_t(X_{I_0}), Y_{I_0}] - (tau_t(X)P_0Y - YP_0tau_t(X))_I||_1
  DiagnosticPoint plain;              // sup_t ||[tau_t(X_{I_0}), Y_{I_0}]||_1
};

/// `i0` must be the window basis of I_0 = [0, I.hi]; the counterterm is compressed to I.
CountertermResidual lr_counterterm_residual(const WindowBasis& i0, const PairData& p, const EnergyWindow& i,
                                            const std::vector<double>& t_grid);

/// sup over (t, s) of ||[[tau_t(X_{I_0}), tau_s(Y_{I_0})], Z_{I_0}]||_1.
DiagnosticPoint double_comm_norm(const WindowBasis& i0, const Observable& x, const Observable& y,
                                 const Observable& z, const std::vector<double>& t_grid,
                                 const std::vector<double>& s_grid);

// ---------------------------------------------------------------------------
// Clustering

struct ClusteringResult {
  DiagnosticPoint residual;          // with both counterterms, operator norm
  DiagnosticPoint plain;             // ||R_K(tau^K_t(X), Y)||
  DiagnosticPoint per_eigenstate;    // sum_E |tr R_E(tau^K_t(X), Y)|
  DiagnosticPoint counterterm_trace; // |tr(tau^K_t(X) P_0 Y)_K|
  double theta3 = 0.0;               // filter edge Theta_2 + |S_X| dist^alpha used by the bound
};

/// K = [Theta_0, Theta_2] must satisfy Theta_2 < 2 Theta_0.
ClusteringResult clustering_residual(const SpectralData& sd, const WindowBasis& k, const Observable& x,
                                     const Observable& y, double theta0, double alpha,
                                     const std::vector<double>& t_grid);

// ---------------------------------------------------------------------------
// Delocalization witnesses (one-magnon sector)

struct DelocWitness {
  double single = 0.0;     // ||(s^x_i P_0 s^x_j)_K|| = ||P_K d_i|| ||P_K d_j||
  double plus = 0.0;       // ||(s^x_i P_0 s^x_j + s^x_j P_0 s^x_i)_K||_2^2
  double minus = 0.0;      // same with the minus sign
  double cesaro = 0.0;     // lim (1/T) int_0^T ||(A(t) - A(t)^*)_K||_2^2 dt = 2 ||A_K||_2^2
  double cesaro_finite = 0.0;  // the time average at the finite T requested (skipped for T = 0)
  bool outside_band = false;   // K not contained in [1 - 1/Delta, 1 + 1/Delta]
};

DelocWitness deloc_witness(const SpectralData& sd, int i, int j, const EnergyWindow& k, double delta,
                           double t_final = 1e4);

// ---------------------------------------------------------------------------
// Fermi projections

/// ||P^(E) X Pbar^(E')|| with P^(E) = chi_{(-inf, E]}(H), Pbar^(E') = chi_{(E', inf)}(H).
double fermi_transition(const SpectralData& sd, const Observable& x, double e, double e_prime);
/// 4 e^{-(E'-E)/(4 theta gamma)}.
double hadamard_bound(double theta, double gamma, double gap);
/// theta = (1 + 1/Delta)/2 + 2 lambda + beta.
double fermi_theta(double delta, double lambda, double beta);

struct FermiCheck {
  long pairs = 0;
  long trivial = 0;     // bound >= ||X||, certified without computing
  long computed = 0;
  long violations = 0;
  double max_ratio = 0.0;  // max measured / bound over computed pairs
};

/// Checks every pair of distinct eigenvalues E < E'.
FermiCheck fermi_check(const SpectralData& sd, const Observable& x, double theta, double gamma);

/// ||[tau_r(X), Y]|| on the full space (small chains).
double full_commutator_norm(const SpectralData& sd, const Observable& x, const Observable& y, double r);

}  // namespace droplet
