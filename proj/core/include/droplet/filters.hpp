#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droplet/spectral.hpp"

namespace droplet {

/// Smooth filter f with f = 1 on [theta1, theta3] and supp f in
/// [theta2, theta3 + theta1 - theta2], built from a Gevrey bump of class alpha.
struct FilterSpec {
  double theta1 = 1.5;
  double theta2 = 0.5;
  double theta3 = 2.5;
  double alpha = 0.5;
  double points_per_unit = 2048.0;

  /// Bump exponent s = alpha / (1 - alpha).
  double exponent() const { return alpha / (1.0 - alpha); }
  double bump_width() const { return theta1 - theta2; }
  double support_lo() const { return theta2; }
  double support_hi() const { return theta3 + theta1 - theta2; }
  void validate() const;
};

/// Real samples on a uniform grid x_k = x0 + k dx; zero outside [support_lo, support_hi].
struct SampledFunction {
  double x0 = 0.0;
  double dx = 1.0;
  Eigen::VectorXd values;
  double support_lo = 0.0;
  double support_hi = 0.0;

  Eigen::Index size() const { return values.size(); }
  double x(Eigen::Index k) const { return x0 + dx * static_cast<double>(k); }
  /// Linear interpolation; zero outside the declared support.
  double operator()(double x) const;
  /// Trapezoid rule.
  double integral() const;
};

/// Complex samples on an arbitrary (sorted) grid.
struct SampledTransform {
  std::vector<double> t;
  Eigen::VectorXcd values;
};

/// h(x) proportional to exp(-1/x^s - 1/(theta-x)^s) on (0, theta), s = alpha/(1-alpha), int h = 1.
SampledFunction gevrey_bump(double theta, double alpha, double points_per_unit = 2048.0);

/// The filter itself: evaluates f exactly on the bump's cumulative table.
class Filter {
 public:
  explicit Filter(const FilterSpec& spec);

  const FilterSpec& spec() const { return spec_; }
  const SampledFunction& bump() const { return bump_; }
  double operator()(double x) const;
  /// f sampled at the configured resolution over its support.
  SampledFunction sample() const;
  /// hat h(t) = (1/2pi) int e^{itx} h(x) dx.
  cplx bump_fourier(double t) const;
  /// hat f(t) = i (e^{it theta2} - e^{it theta3}) hat h(t) / t, with the t -> 0 limit.
  cplx fourier(double t) const;
  SampledTransform fourier(const std::vector<double>& t) const;
  /// Integration range [-T, T] beyond which |hat f| is below `cutoff`.
  double effective_time(double cutoff = 1e-13) const;
  /// ||hat f||_1 by quadrature over the effective range.
  double fourier_l1() const;

 private:
  FilterSpec spec_;
  SampledFunction bump_;
  Eigen::VectorXd cumulative_;  // k(x) on the bump grid, k(0) = 0, k(theta) = 1
  double step(double x) const;
};

SampledFunction filter_f(const FilterSpec& spec);

/// hat f(t) = (1/2pi) int e^{itx} f(x) dx by trapezoid quadrature.
SampledTransform fourier(const SampledFunction& f, const std::vector<double>& t_grid);
/// f(x) = int e^{-itx} hat f(t) dt by trapezoid quadrature over the (uniform) grid of `fhat`.
cplx inverse_fourier(const SampledTransform& fhat, double x);
/// Symmetric uniform grid {-T, ..., T} with spacing dt.
std::vector<double> uniform_grid(double t_max, double dt);

/// Two-column CSV "x,f" and three-column "t,re,im" exports.
void write_function_csv(const SampledFunction& f, const std::string& path);
void write_transform_csv(const SampledTransform& fhat, const std::string& path);

struct HastingsResult {
  double residual = 0.0;        // operator norm
  double quadrature_error = 0.0;  // max |F - f| over the frequencies used (quadrature mode)
  bool warning = false;
};

/// ||X f(H) Y - int e^{-irH} Y tau_r(X) hat f(r) dr|| on the full space. With an
/// empty `r_grid` the integral is evaluated exactly in the eigenbasis; otherwise
/// by trapezoid quadrature of `filter.fourier` on the uniform grid given.
HastingsResult hastings_residual(const SpectralData& sd, const Observable& x, const Observable& y,
                                 const Filter& filter, const std::vector<double>& r_grid = {},
                                 double tolerance = 1e-6);

/// K_f = [2 K.lo - f.hi, 2 K.hi - f.lo].
EnergyWindow kf_window(const EnergyWindow& k, double f_lo, double f_hi);

/// Max entry deviation between both sides of the window-shift identity for E, E' in K.
double insertion_check(const SpectralData& sd, const Observable& x, const Observable& y,
                       const std::function<double(double)>& f, double f_lo, double f_hi,
                       const EnergyWindow& k);

}  // namespace droplet
