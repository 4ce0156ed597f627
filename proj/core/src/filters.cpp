#include "droplet/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "droplet/error.hpp"
#include "droplet/linalg.hpp"

namespace droplet {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

double trapezoid_weight(Eigen::Index k, Eigen::Index n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

// Linear interpolation of a uniform table; clamps outside.
double interpolate(const VectorXd& table, double x0, double dx, double x) {
  const double u = (x - x0) / dx;
  if (u <= 0.0) return table(0);
  const auto last = table.size() - 1;
  if (u >= static_cast<double>(last)) return table(last);
  const auto k = static_cast<Eigen::Index>(u);
  const double w = u - static_cast<double>(k);
  return (1.0 - w) * table(k) + w * table(k + 1);
}

// Full eigenbasis (columns sorted by energy) of a complete spectrum.
WindowBasis full_basis(const SpectralData& sd, const char* who) {
  if (!sd.complete || !sd.has_vectors) {
    throw InvalidArgument(std::string(who) + ": needs the complete spectrum with eigenvectors");
  }
  if (sd.n_sites() > 9) throw CapacityError(std::string(who) + ": full-space evaluation limited to 9 sites");
  return window_basis(sd, EnergyWindow::all());
}

}  // namespace

void FilterSpec::validate() const {
  if (!(theta2 < theta1 && theta1 <= theta3)) {
    throw InvalidArgument("FilterSpec: need theta2 < theta1 <= theta3");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("FilterSpec: alpha must lie in (0, 1)");
  if (!(points_per_unit > 0.0)) throw InvalidArgument("FilterSpec: grid resolution must be positive");
}

double SampledFunction::operator()(double x) const {
  if (x < support_lo || x > support_hi || values.size() == 0) return 0.0;
  return interpolate(values, x0, dx, x);
}

double SampledFunction::integral() const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) s += trapezoid_weight(k, values.size()) * values(k);
  return s * dx;
}

SampledFunction gevrey_bump(double theta, double alpha, double points_per_unit) {
  if (!(theta > 0.0)) throw InvalidArgument("gevrey_bump: support length must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("gevrey_bump: alpha must lie in (0, 1)");
  const auto intervals = static_cast<Eigen::Index>(std::ceil(theta * points_per_unit));
  if (intervals + 1 < 64) {
    throw InvalidArgument("gevrey_bump: grid too coarse (" + std::to_string(intervals + 1) +
                          " points across the support, need 64)");
  }
  const double s = alpha / (1.0 - alpha);
  SampledFunction h;
  h.x0 = 0.0;
  h.dx = theta / static_cast<double>(intervals);
  h.support_lo = 0.0;
  h.support_hi = theta;
  h.values = VectorXd::Zero(intervals + 1);
  for (Eigen::Index k = 1; k < intervals; ++k) {
    const double x = h.x(k);
    h.values(k) = std::exp(-1.0 / std::pow(x, s) - 1.0 / std::pow(theta - x, s));
  }
  const double norm = h.integral();
  if (!(norm > 0.0)) throw InvalidArgument("gevrey_bump: bump underflows on this support");
  h.values /= norm;
  return h;
}

Filter::Filter(const FilterSpec& spec) : spec_(spec) {
  spec_.validate();
  bump_ = gevrey_bump(spec_.bump_width(), spec_.alpha, spec_.points_per_unit);
  const auto n = bump_.size();
  cumulative_ = VectorXd::Zero(n);
  for (Eigen::Index k = 1; k < n; ++k) {
    cumulative_(k) = cumulative_(k - 1) + 0.5 * bump_.dx * (bump_.values(k - 1) + bump_.values(k));
  }
  cumulative_ /= cumulative_(n - 1);
  cumulative_(n - 1) = 1.0;
}

double Filter::step(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= bump_.support_hi) return 1.0;
  return interpolate(cumulative_, 0.0, bump_.dx, x);
}

double Filter::operator()(double x) const { return step(x - spec_.theta2) - step(x - spec_.theta3); }

SampledFunction Filter::sample() const {
  SampledFunction f;
  f.support_lo = spec_.support_lo();
  f.support_hi = spec_.support_hi();
  const auto intervals =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil((f.support_hi - f.support_lo) * spec_.points_per_unit)));
  f.x0 = f.support_lo;
  f.dx = (f.support_hi - f.support_lo) / static_cast<double>(intervals);
  f.values.resize(intervals + 1);
  for (Eigen::Index k = 0; k <= intervals; ++k) f.values(k) = (*this)(f.x(k));
  return f;
}

cplx Filter::bump_fourier(double t) const {
  // h is symmetric about theta/2, so hat h = e^{it theta/2} times a real cosine transform.
  const double c = 0.5 * bump_.support_hi;
  double s = 0.0;
  const auto n = bump_.size();
  for (Eigen::Index k = 1; k + 1 < n; ++k) s += bump_.values(k) * std::cos(t * (bump_.x(k) - c));
  return std::polar(s * bump_.dx / kTwoPi, t * c);
}

cplx Filter::fourier(double t) const {
  // i (e^{it a} - e^{it b}) / t = (b - a) e^{it(a+b)/2} sinc(t(b-a)/2), regular at t = 0.
  const double a = spec_.theta2;
  const double b = spec_.theta3;
  const double c = b - a;
  if (c == 0.0) return cplx(0.0);
  return c * sinc(0.5 * t * c) * std::polar(1.0, 0.5 * t * (a + b)) * bump_fourier(t);
}

SampledTransform Filter::fourier(const std::vector<double>& t) const {
  SampledTransform out;
  out.t = t;
  out.values.resize(static_cast<Eigen::Index>(t.size()));
  for (std::size_t k = 0; k < t.size(); ++k) out.values(static_cast<Eigen::Index>(k)) = fourier(t[k]);
  return out;
}

double Filter::effective_time(double cutoff) const {
  // Scan |hat h| on a grid fine enough to follow its oscillation until a whole
  // octave stays below the cutoff.
  const double c = std::max(spec_.theta3 - spec_.theta2, 1e-300);
  const double dt = std::min(0.1, 0.5 / bump_.support_hi);
  double lo = 1.0;
  while (lo < 1e6) {
    double peak = 0.0;
    for (double t = lo; t <= 2.0 * lo; t += dt) {
      peak = std::max(peak, std::abs(bump_fourier(t)) * c * std::min(1.0, 2.0 / (c * t)));
    }
    if (peak < cutoff) return lo;
    lo *= 2.0;
  }
  return lo;
}

double Filter::fourier_l1() const {
  const double c = spec_.theta3 - spec_.theta2;
  const double t_max = effective_time();
  // |hat f| = c |sinc(tc/2)| |g(t)| with g smooth on the scale of the bump;
  // tabulate |g| coarsely and resolve the sinc factor finely.
  const double dg = std::min(0.02, 0.02 / bump_.support_hi);
  const auto ng = static_cast<Eigen::Index>(std::ceil(t_max / dg)) + 1;
  VectorXd g(ng);
  for (Eigen::Index k = 0; k < ng; ++k) g(k) = std::abs(bump_fourier(dg * static_cast<double>(k)));
  const double dt = kTwoPi / (64.0 * std::max({c, bump_.support_hi, 1.0}));
  const auto nt = static_cast<Eigen::Index>(std::ceil(t_max / dt)) + 1;
  double s = 0.0;
  for (Eigen::Index k = 0; k < nt; ++k) {
    const double t = dt * static_cast<double>(k);
    s += trapezoid_weight(k, nt) * c * std::abs(sinc(0.5 * t * c)) * interpolate(g, 0.0, dg, t);
  }
  return 2.0 * s * dt;
}

SampledFunction filter_f(const FilterSpec& spec) { return Filter(spec).sample(); }

SampledTransform fourier(const SampledFunction& f, const std::vector<double>& t_grid) {
  SampledTransform out;
  out.t = t_grid;
  out.values = VectorXcd::Zero(static_cast<Eigen::Index>(t_grid.size()));
  const auto n = f.size();
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    cplx s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (f.values(k) == 0.0) continue;
      s += trapezoid_weight(k, n) * f.values(k) * std::polar(1.0, t_grid[j] * f.x(k));
    }
    out.values(static_cast<Eigen::Index>(j)) = s * f.dx / kTwoPi;
  }
  return out;
}

cplx inverse_fourier(const SampledTransform& fhat, double x) {
  const auto n = static_cast<Eigen::Index>(fhat.t.size());
  if (n < 2) throw InvalidArgument("inverse_fourier: need at least two samples");
  const double dt = fhat.t[1] - fhat.t[0];
  cplx s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    s += trapezoid_weight(k, n) * fhat.values(k) * std::polar(1.0, -fhat.t[static_cast<std::size_t>(k)] * x);
  }
  return s * dt;
}

std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw InvalidArgument("uniform_grid: need dt > 0 and t_max >= 0");
  const auto n = static_cast<long>(std::ceil(t_max / dt));
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long k = -n; k <= n; ++k) t.push_back(dt * static_cast<double>(k));
  return t;
}

void write_function_csv(const SampledFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "x,f\n";
  char buf[96];
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.x(k), f.values(k));
    os << buf;
  }
  if (!os) throw Error("write failed for " + path);
}

void write_transform_csv(const SampledTransform& fhat, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "t,re,im\n";
  char buf[128];
  for (std::size_t k = 0; k < fhat.t.size(); ++k) {
    const cplx v = fhat.values(static_cast<Eigen::Index>(k));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fhat.t[k], v.real(), v.imag());
    os << buf;
  }
  if (!os) throw Error("write failed for " + path);
}

HastingsResult hastings_residual(const SpectralData& sd, const Observable& x, const Observable& y,
                                 const Filter& filter, const std::vector<double>& r_grid, double tolerance) {
  const WindowBasis b = full_basis(sd, "hastings_residual");
  const VectorXd& e = b.energies;
  const auto n = b.size();
  const MatrixXcd xe = window_matrix(b, x);
  const MatrixXcd ye = window_matrix(b, y);

  HastingsResult result;
  // F(nu) = int e^{-ir nu} hat f(r) dr; equal to f in exact mode.
  std::function<cplx(double)> big_f = [&filter](double nu) { return cplx(filter(nu)); };
  VectorXd re_table, im_table;
  double nu_lo = 0.0, nu_step = 1.0;
  if (!r_grid.empty()) {
    if (r_grid.size() < 2) throw InvalidArgument("hastings_residual: quadrature grid needs two points");
    const SampledTransform fhat = filter.fourier(r_grid);
    nu_lo = 2.0 * e.minCoeff() - e.maxCoeff();
    const double nu_hi = 2.0 * e.maxCoeff() - e.minCoeff();
    nu_step = 1.0 / filter.spec().points_per_unit;
    const auto m = static_cast<Eigen::Index>(std::ceil((nu_hi - nu_lo) / nu_step)) + 1;
    re_table.resize(m);
    im_table.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double nu = nu_lo + nu_step * static_cast<double>(k);
      const cplx v = inverse_fourier(fhat, nu);
      re_table(k) = v.real();
      im_table(k) = v.imag();
      result.quadrature_error = std::max(result.quadrature_error, std::abs(v - filter(nu)));
    }
    big_f = [&](double nu) {
      return cplx(interpolate(re_table, nu_lo, nu_step, nu), interpolate(im_table, nu_lo, nu_step, nu));
    };
    result.warning = result.quadrature_error > tolerance;
  }

  VectorXcd fe(n);
  for (Eigen::Index k = 0; k < n; ++k) fe(k) = filter(e(k));
  MatrixXcd residual = xe * fe.asDiagonal() * ye;
  MatrixXcd weights(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ye.col(k).cwiseAbs().maxCoeff() == 0.0 || xe.row(k).cwiseAbs().maxCoeff() == 0.0) continue;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) weights(r, c) = big_f(e(r) + e(c) - e(k));
    }
    residual -= (ye.col(k) * xe.row(k)).cwiseProduct(weights);
  }
  result.residual = linalg::operator_norm(residual);
  return result;
}

EnergyWindow kf_window(const EnergyWindow& k, double f_lo, double f_hi) {
  if (!(f_lo <= f_hi)) throw InvalidArgument("kf_window: empty filter support");
  return EnergyWindow::closed(2.0 * k.lo - f_hi, 2.0 * k.hi - f_lo);
}

double insertion_check(const SpectralData& sd, const Observable& x, const Observable& y,
                       const std::function<double(double)>& f, double f_lo, double f_hi,
                       const EnergyWindow& k) {
  const WindowBasis full = full_basis(sd, "insertion_check");
  const WindowBasis kb = window_basis(sd, k);
  const EnergyWindow kf = kf_window(k, f_lo, f_hi);
  const auto w = kb.size();
  if (w == 0) return 0.0;
  const MatrixXcd kt = kb.vectors.transpose().cast<cplx>();
  const MatrixXcd y_kn = kt * y.apply(full.vectors);                              // <E|Y|k>
  const MatrixXcd x_nk = full.vectors.transpose().cast<cplx>() * x.apply(kb.vectors);  // <k|X|E'>
  MatrixXcd lhs = MatrixXcd::Zero(w, w);
  MatrixXcd rhs = MatrixXcd::Zero(w, w);
  for (Eigen::Index m = 0; m < full.size(); ++m) {
    const double em = full.energies(m);
    MatrixXcd term(w, w);
    for (Eigen::Index c = 0; c < w; ++c) {
      for (Eigen::Index r = 0; r < w; ++r) {
        term(r, c) = y_kn(r, m) * f(kb.energies(r) + kb.energies(c) - em) * x_nk(m, c);
      }
    }
    lhs += term;
    if (kf.contains(em)) rhs += term;
  }
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace droplet
