#include "droplet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "droplet/error.hpp"
#include "droplet/linalg.hpp"

namespace droplet {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Columns of `b` grouped by the eigenvalue cluster they belong to.
std::vector<std::vector<Index>> cluster_groups(const SpectralData& sd, const WindowBasis& b) {
  std::vector<int> cluster_of(sd.global_index.size(), -1);
  for (std::size_t c = 0; c < sd.clusters.size(); ++c) {
    for (int l : sd.clusters[c].levels) cluster_of[static_cast<std::size_t>(l)] = static_cast<int>(c);
  }
  std::vector<std::vector<Index>> groups;
  int last = -1;
  for (Index col = 0; col < b.size(); ++col) {
    const int c = cluster_of.at(static_cast<std::size_t>(b.levels[static_cast<std::size_t>(col)]));
    if (c != last) groups.emplace_back();
    groups.back().push_back(col);
    last = c;
  }
  return groups;
}

// Rows of v where site `site` is spin down (N_i v), other rows zeroed.
MatrixXd number_rows(const MatrixXd& v, int site, int half_length) {
  const int bit = bit_of(site, half_length);
  MatrixXd out = v;
  for (Index r = 0; r < v.rows(); ++r) {
    if (((r >> bit) & 1) == 0) out.row(r).setZero();
  }
  return out;
}

// Running supremum over a time grid.
struct SupTracker {
  double value = -1.0;
  double t_star = 0.0;
  double t_last = -std::numeric_limits<double>::infinity();
  int updates = 0;
  void update(double v, double t) {
    if (v > value) {
      value = v;
      t_star = t;
    }
    t_last = std::max(t_last, t);
    ++updates;
  }
  DiagnosticPoint point(std::string name, double abscissa) const {
    DiagnosticPoint p;
    p.name = std::move(name);
    p.abscissa = abscissa;
    p.value = std::max(value, 0.0);
    p.t_star = t_star;
    // The sup over all times is only approximated when the maximum sits at the largest grid time.
    if (updates > 1 && value > 0.0 && t_star == t_last) p.flags.push_back(kFlagSupAtGridEnd);
    return p;
  }
};

void require_grid(const std::vector<double>& t_grid, const char* who) {
  if (t_grid.empty()) throw InvalidArgument(std::string(who) + ": empty time grid");
}

MatrixXcd commutator(const MatrixXcd& a, const MatrixXcd& b) { return a * b - b * a; }

}  // namespace

// ---------------------------------------------------------------------------

DecayFit fit_decay(const std::vector<double>& abscissa, const std::vector<double>& values, DecayModel model,
                   double alpha) {
  if (abscissa.size() != values.size()) throw InvalidArgument("fit_decay: size mismatch");
  const auto n = static_cast<int>(values.size());
  if (n < 4) throw InvalidArgument("fit_decay: need at least 4 points");
  if (model == DecayModel::exponential) alpha = 1.0;
  if (!(alpha > 0.0)) throw InvalidArgument("fit_decay: alpha must be positive");
  DecayFit fit;
  fit.model = model;
  fit.alpha = alpha;
  fit.n_points = n;
  std::vector<double> x(n), y(n);
  int floored = 0;
  for (int k = 0; k < n; ++k) {
    if (model == DecayModel::stretched && abscissa[k] < 0.0) {
      throw InvalidArgument("fit_decay: stretched model needs nonnegative abscissae");
    }
    x[k] = model == DecayModel::exponential ? abscissa[k] : std::pow(abscissa[k], alpha);
    double v = values[k];
    if (!(v > kFitFloor)) {
      v = kFitFloor;
      ++floored;
    }
    y[k] = std::log(v);
  }
  if (floored == n) throw InvalidArgument("fit_decay: every value is at or below the floor");
  fit.floored = floored > 0;
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (x[k] - xm) * (x[k] - xm);
    sxy += (x[k] - xm) * (y[k] - ym);
    syy += (y[k] - ym) * (y[k] - ym);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_decay: abscissae are all equal");
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  double ss_res = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = y[k] - (intercept + slope * x[k]);
    ss_res += r * r;
  }
  fit.rate = -slope;
  fit.prefactor = std::exp(intercept);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  const double s2 = ss_res / (n - 2);
  fit.rate_stderr = std::sqrt(s2 / sxx);
  fit.log_prefactor_stderr = std::sqrt(s2 * (1.0 / n + xm * xm / sxx));
  return fit;
}

DecayFit fit_decay(const std::vector<DiagnosticPoint>& points, DecayModel model, double alpha) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.abscissa);
    y.push_back(p.value);
  }
  return fit_decay(x, y, model, alpha);
}

// ---------------------------------------------------------------------------

double dl_kernel(const WindowBasis& b, const SpectralData& sd, int i, int j) {
  const int L = sd.half_length;
  if (!chain_interval(L).contains(i) || !chain_interval(L).contains(j)) {
    throw InvalidArgument("dl_kernel: site outside the chain");
  }
  if (b.size() == 0) return 0.0;
  const MatrixXd ni = number_rows(b.vectors, i, L);
  const MatrixXd nj = i == j ? ni : number_rows(b.vectors, j, L);
  double total = 0.0;
  for (const auto& g : cluster_groups(sd, b)) {
    if (g.size() == 1) {
      total += ni.col(g[0]).norm() * nj.col(g[0]).norm();
      continue;
    }
    MatrixXcd left(ni.rows(), static_cast<Index>(g.size()));
    MatrixXcd right(nj.rows(), static_cast<Index>(g.size()));
    for (std::size_t c = 0; c < g.size(); ++c) {
      left.col(static_cast<Index>(c)) = ni.col(g[c]).cast<cplx>();
      right.col(static_cast<Index>(c)) = nj.col(g[c]).cast<cplx>();
    }
    total += linalg::trace_norm_low_rank(left, VectorXcd::Ones(static_cast<Index>(g.size())), right);
  }
  return total;
}

double dl_kernel(const SpectralData& sd, int i, int j, const EnergyWindow& w) {
  return dl_kernel(window_basis(sd, w), sd, i, j);
}

double sandwich_norm(const SpectralData& sd, const Observable& a, const std::function<cplx(double)>& g,
                     const Observable& b, const EnergyWindow& w) {
  const WindowBasis wb = window_basis(sd, w);
  if (wb.size() == 0) return 0.0;
  VectorXcd weights(wb.size());
  for (Index k = 0; k < wb.size(); ++k) weights(k) = g(wb.energies(k));
  if (weights.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // A g(H) B = (A V) diag(g) (B^* V)^*.
  return linalg::trace_norm_low_rank(a.apply(wb.vectors), weights, b.adjoint().apply(wb.vectors));
}

// ---------------------------------------------------------------------------

NonspreadPlan::NonspreadPlan(const WindowBasis& i0, const Observable& x, int ell) : basis_(&i0), ell_(ell) {
  if (ell < 1) throw InvalidArgument("nonspread: ell must be at least 1");
  const int L = i0.half_length;
  const Interval chain = chain_interval(L);
  core_ = x.support().grown(ell / 2, chain);
  support_ = x.support().grown(ell, chain);
  const cplx zeta = pm_decompose(x).zeta;
  const Observable shifted = x - zeta * identity_on(L, x.support());
  m_ = window_matrix(i0, shifted);

  const int off = bit_of(core_.lo, L);
  const Index k = Index{1} << core_.size();
  const auto w = i0.size();
  v_core_.resize(k, w);
  for (Index c = 0; c < k; ++c) v_core_.row(c) = i0.vectors.row(c << off);
  // Configurations o of the sites outside S_l (T = S_l minus the core stays up).
  std::vector<int> free_bits;
  for (int s = chain.lo; s <= chain.hi; ++s) {
    if (!support_.contains(s)) free_bits.push_back(bit_of(s, L));
  }
  const Index n_free = Index{1} << free_bits.size();
  for (Index o = 0; o < n_free; ++o) {
    Index base = 0;
    for (std::size_t f = 0; f < free_bits.size(); ++f) {
      if ((o >> f) & 1) base |= Index{1} << free_bits[f];
    }
    MatrixXd wo(k, w);
    for (Index c = 0; c < k; ++c) wo.row(c) = i0.vectors.row(base | (c << off));
    overlaps_.push_back(v_core_.transpose() * wo);
  }
}

double NonspreadPlan::error(double t) const {
  const auto w = basis_->size();
  if (w == 0) return 0.0;
  const MatrixXcd n = evolve(*basis_, m_, t);
  MatrixXcd approx = MatrixXcd::Zero(w, w);
  for (const auto& c : overlaps_) {
    const MatrixXcd cc = c.cast<cplx>();
    approx += cc.transpose() * n * cc;
  }
  return linalg::trace_norm(approx - n);
}

DiagnosticPoint NonspreadPlan::sup(const std::vector<double>& t_grid) const {
  require_grid(t_grid, "nonspread");
  SupTracker s;
  for (double t : t_grid) s.update(error(t), t);
  return s.point("nonspread", ell_);
}

double nonspread_error(const WindowBasis& i0, const Observable& x, int ell, double t) {
  return NonspreadPlan(i0, x, ell).error(t);
}

Observable nonspread_observable(const SpectralData& sd, const EnergyWindow& i0, const Observable& x, int ell,
                                double t) {
  const int L = sd.half_length;
  if (sd.n_sites() > 12) throw CapacityError("nonspread_observable: dense construction limited to 12 sites");
  const WindowBasis b = window_basis(sd, i0);
  const Interval chain = chain_interval(L);
  const Interval core = x.support().grown(ell / 2, chain);
  const Interval support = x.support().grown(ell, chain);
  const cplx zeta = pm_decompose(x).zeta;
  const Observable shifted = x - zeta * identity_on(L, x.support());
  const MatrixXcd n = evolve(b, window_matrix(b, shifted), t);
  const MatrixXcd vc = b.vectors.cast<cplx>();
  const Observable tilde = compress_dense(L, vc * n * vc.transpose(), core);
  // P_+^(T) (x) Z^ on S_l, with T = S_l minus the core.
  const Index dim = Index{1} << support.size();
  const int off = core.lo - support.lo;
  const Index core_mask = ((Index{1} << core.size()) - 1) << off;
  MatrixXcd local = MatrixXcd::Zero(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    if ((r & ~core_mask) != 0) continue;
    for (Index c = 0; c < dim; ++c) {
      if ((c & ~core_mask) != 0) continue;
      local(r, c) = tilde.local()(r >> off, c >> off);
    }
  }
  local += zeta * MatrixXcd::Identity(dim, dim);
  return Observable(L, support, local);
}

// ---------------------------------------------------------------------------

DiagnosticPoint lr_norm(const WindowBasis& w, const PairData& p, const std::vector<double>& t_grid) {
  require_grid(t_grid, "lr_norm");
  SupTracker s;
  if (w.size() == 0) {
    auto pt = SupTracker{0.0, 0.0}.point("lr_norm", 0.0);
    pt.flags.push_back("empty_window");
    return pt;
  }
  for (double t : t_grid) s.update(linalg::trace_norm(commutator(evolve(w, p.mx, t), p.my)), t);
  return s.point("lr_norm", 0.0);
}

CountertermResidual lr_counterterm_residual(const WindowBasis& i0, const PairData& p, const EnergyWindow& i,
                                            const std::vector<double>& t_grid) {
  require_grid(t_grid, "lr_counterterm_residual");
  CountertermResidual out;
  const auto w = i0.size();
  if (w == 0) {
    out.with_counterterms = SupTracker{0.0, 0.0}.point("lr_counterterm_residual", 0.0);
    out.plain = SupTracker{0.0, 0.0}.point("lr_plain", 0.0);
    return out;
  }
  VectorXd mask(w);
  for (Index k = 0; k < w; ++k) mask(k) = i.contains(i0.energies(k)) ? 1.0 : 0.0;
  const MatrixXd mask2 = mask * mask.transpose();
  SupTracker with, plain;
  for (double t : t_grid) {
    const MatrixXcd c = commutator(evolve(i0, p.mx, t), p.my);
    const RankOneTerm a = counterterm(i0, p, t);
    const RankOneTerm b = counterterm_reversed(i0, p, t);
    const MatrixXcd ct = (a.matrix() - b.matrix()).cwiseProduct(mask2.cast<cplx>());
    with.update(linalg::trace_norm(c - ct), t);
    plain.update(linalg::trace_norm(c), t);
  }
  out.with_counterterms = with.point("lr_counterterm_residual", 0.0);
  out.plain = plain.point("lr_plain", 0.0);
  return out;
}

DiagnosticPoint double_comm_norm(const WindowBasis& i0, const Observable& x, const Observable& y,
                                 const Observable& z, const std::vector<double>& t_grid,
                                 const std::vector<double>& s_grid) {
  require_grid(t_grid, "double_comm_norm");
  require_grid(s_grid, "double_comm_norm");
  SupTracker sup;
  if (i0.size() == 0) return SupTracker{0.0, 0.0}.point("double_comm", 0.0);
  const MatrixXcd mx = window_matrix(i0, x);
  const MatrixXcd my = window_matrix(i0, y);
  const MatrixXcd mz = window_matrix(i0, z);
  std::vector<MatrixXcd> ys;
  for (double s : s_grid) ys.push_back(evolve(i0, my, s));
  for (double t : t_grid) {
    const MatrixXcd xt = evolve(i0, mx, t);
    for (const auto& ysm : ys) sup.update(linalg::trace_norm(commutator(commutator(xt, ysm), mz)), t);
  }
  return sup.point("double_comm", 0.0);
}

// ---------------------------------------------------------------------------

ClusteringResult clustering_residual(const SpectralData& sd, const WindowBasis& k, const Observable& x,
                                     const Observable& y, double theta0, double alpha,
                                     const std::vector<double>& t_grid) {
  require_grid(t_grid, "clustering_residual");
  const EnergyWindow& kw = k.window;
  const double tol = 1e-12 * std::max(1.0, 2.0 * theta0);
  if (!(kw.hi < 2.0 * theta0 - tol)) {
    throw InvalidArgument(
        "clustering_residual: K must end below twice the droplet bottom; above it clustering fails "
        "(optimality of the droplet spectrum)");
  }
  if (!(kw.lo >= theta0 - tol)) throw InvalidArgument("clustering_residual: K must start at the droplet bottom");

  ClusteringResult out;
  const int dist = distance(x.support(), y.support());
  out.theta3 = kw.hi + x.support().size() * std::pow(static_cast<double>(dist), alpha);
  const auto w = k.size();
  if (w == 0) {
    out.residual = SupTracker{0.0, 0.0}.point("clustering_residual", dist);
    out.plain = SupTracker{0.0, 0.0}.point("clustering_plain", dist);
    out.per_eigenstate = SupTracker{0.0, 0.0}.point("per_eigenstate_clustering", dist);
    out.counterterm_trace = SupTracker{0.0, 0.0}.point("counterterm_trace", dist);
    return out;
  }
  const PairData p = pair_data(k, x, y);
  const MatrixXcd r = p.mxy - p.mx * p.my;  // R_K(X, Y)
  const auto groups = cluster_groups(sd, k);
  SupTracker res, plain, per, trace;
  for (double t : t_grid) {
    const VectorXcd d = phases(k, t);
    // R_K(tau^K_t(X), Y) = e^{itH_K} R_K(X, Y) because tau^K_t fixes the complement of K.
    const MatrixXcd rt = d.asDiagonal() * r;
    const MatrixXcd ct = d.cwiseProduct(p.x_psi0) * p.ys_psi0.adjoint() + d.cwiseProduct(p.y_psi0) * p.xs_psi0.adjoint();
    res.update(linalg::operator_norm(rt - ct), t);
    plain.update(linalg::operator_norm(rt), t);

    double sum = 0.0;
    for (const auto& g : groups) {
      cplx tr = 0.0;
      for (Index a : g) {
        cplx inner = p.mxy(a, a);
        for (Index b = 0; b < w; ++b) {
          const bool same = std::find(g.begin(), g.end(), b) != g.end();
          inner -= p.mx(a, b) * p.my(b, a);
          if (!same) inner += p.mx(a, b) * std::conj(d(b)) * p.my(b, a);
        }
        tr += d(a) * inner;
      }
      sum += std::abs(tr);
    }
    per.update(sum, t);
    trace.update(std::abs((d.cwiseProduct(p.x_psi0).array() * p.ys_psi0.conjugate().array()).sum()), t);
  }
  out.residual = res.point("clustering_residual", dist);
  out.plain = plain.point("clustering_plain", dist);
  out.per_eigenstate = per.point("per_eigenstate_clustering", dist);
  out.counterterm_trace = trace.point("counterterm_trace", dist);
  return out;
}

// ---------------------------------------------------------------------------

DelocWitness deloc_witness(const SpectralData& sd, int i, int j, const EnergyWindow& k, double delta,
                           double t_final) {
  if (k.contains(0.0)) throw InvalidArgument("deloc_witness: K must not contain 0");
  if (!sd.has_vectors || !sd.sector_covered(1)) {
    throw InvalidArgument("deloc_witness: needs the full one-magnon spectrum with eigenvectors");
  }
  const int L = sd.half_length;
  if (!chain_interval(L).contains(i) || !chain_interval(L).contains(j)) {
    throw InvalidArgument("deloc_witness: site outside the chain");
  }
  if (!(t_final >= 0.0)) throw InvalidArgument("deloc_witness: averaging time must be nonnegative");
  DelocWitness out;
  const double band_lo = 1.0 - 1.0 / delta;
  const double band_hi = 1.0 + 1.0 / delta;
  out.outside_band = k.lo < band_lo - 1e-12 || k.hi > band_hi + 1e-12;

  const SectorSpectrum& s1 = sd.sectors.at(1);
  const SectorBasis& basis = sd.basis(1);
  const auto ii = static_cast<Index>(*basis.index_of(Config{1} << bit_of(i, L)));
  const auto jj = static_cast<Index>(*basis.index_of(Config{1} << bit_of(j, L)));
  std::vector<Index> cols;
  for (Index c = 0; c < s1.values.size(); ++c) {
    if (k.contains(s1.values(c))) cols.push_back(c);
  }
  const auto w = static_cast<Index>(cols.size());
  if (w == 0) return out;
  VectorXd cu(w), cv(w), e(w);
  for (Index c = 0; c < w; ++c) {
    cu(c) = s1.vectors(ii, cols[c]);
    cv(c) = s1.vectors(jj, cols[c]);
    e(c) = s1.values(cols[c]);
  }
  out.single = cu.norm() * cv.norm();
  const MatrixXd uv = cu * cv.transpose();
  out.plus = (uv + uv.transpose()).squaredNorm();
  out.minus = (uv - uv.transpose()).squaredNorm();
  const MatrixXd a = uv + uv.transpose();  // A_K in the eigenbasis of K
  out.cesaro = 2.0 * a.squaredNorm();
  if (t_final == 0.0) return out;

  // ||B_t - B_t^*||_2^2 with B_t = e^{itH} A_K, averaged over [0, T] by Simpson's rule.
  const double top = 2.0 * e.cwiseAbs().maxCoeff();
  const double h_max = std::min(0.05, std::numbers::pi / (16.0 * std::max(top, 1e-300)));
  auto intervals = static_cast<long>(std::ceil(t_final / h_max));
  if (intervals % 2) ++intervals;
  const double h = t_final / static_cast<double>(intervals);
  const MatrixXcd ac = a.cast<cplx>();
  auto z2 = [&](double t) {
    const VectorXcd d = (cplx(0.0, t) * e.cast<cplx>()).array().exp();
    const MatrixXcd b = d.asDiagonal() * ac;
    return (b - b.adjoint()).squaredNorm();
  };
  double sum = z2(0.0) + z2(t_final);
  for (long n = 1; n < intervals; ++n) sum += (n % 2 ? 4.0 : 2.0) * z2(h * static_cast<double>(n));
  out.cesaro_finite = sum * h / 3.0 / t_final;
  return out;
}

// ---------------------------------------------------------------------------

double hadamard_bound(double theta, double gamma, double gap) {
  if (!(theta > 0.0) || !(gamma > 0.0)) throw InvalidArgument("hadamard_bound: theta and gamma must be positive");
  return 4.0 * std::exp(-gap / (4.0 * theta * gamma));
}

double fermi_theta(double delta, double lambda, double beta) {
  return 0.5 * (1.0 + 1.0 / delta) + 2.0 * lambda + beta;
}

namespace {

WindowBasis fermi_basis(const SpectralData& sd) {
  if (!sd.complete || !sd.has_vectors) throw InvalidArgument("fermi: needs the complete spectrum with eigenvectors");
  if (sd.n_sites() > 11) throw CapacityError("fermi: full-space evaluation limited to 11 sites");
  return window_basis(sd, EnergyWindow::all());
}

}  // namespace

double fermi_transition(const SpectralData& sd, const Observable& x, double e, double e_prime) {
  if (!(e < e_prime)) throw InvalidArgument("fermi_transition: need E < E'");
  const WindowBasis b = fermi_basis(sd);
  const double tol = sd.cluster_tolerance();
  Index rows = 0, first_col = b.size();
  for (Index k = 0; k < b.size(); ++k) {
    if (b.energies(k) <= e + tol) rows = k + 1;
  }
  for (Index k = b.size() - 1; k >= 0; --k) {
    if (b.energies(k) > e_prime + tol) first_col = k;
  }
  if (rows == 0 || first_col == b.size()) return 0.0;
  const MatrixXcd xv = x.apply(MatrixXd(b.vectors.rightCols(b.size() - first_col)));
  return linalg::operator_norm(b.vectors.leftCols(rows).transpose().cast<cplx>() * xv);
}

FermiCheck fermi_check(const SpectralData& sd, const Observable& x, double theta, double gamma) {
  FermiCheck out;
  const double xnorm = x.norm();
  const auto& clusters = sd.clusters;
  const auto nc = static_cast<long>(clusters.size());
  // Cluster c occupies global positions [start[c], start[c + 1]).
  std::vector<Index> start(static_cast<std::size_t>(nc) + 1, 0);
  for (long c = 0; c < nc; ++c) start[c + 1] = start[c] + static_cast<Index>(clusters[c].levels.size());
  std::optional<WindowBasis> b;
  MatrixXcd xe;
  for (long p = 0; p < nc; ++p) {
    for (long q = p + 1; q < nc; ++q) {
      ++out.pairs;
      const double bound = hadamard_bound(theta, gamma, clusters[q].energy - clusters[p].energy);
      if (bound >= xnorm * (1.0 + 1e-12)) {
        ++out.trivial;
        continue;
      }
      if (!b) {
        b = fermi_basis(sd);
        xe = b->vectors.transpose().cast<cplx>() * x.apply(b->vectors);
      }
      const Index rows = start[p + 1];
      const Index first_col = start[q + 1];
      double measured = 0.0;
      if (first_col < xe.cols()) measured = linalg::operator_norm(xe.topRightCorner(rows, xe.cols() - first_col));
      ++out.computed;
      out.max_ratio = std::max(out.max_ratio, measured / bound);
      if (measured > bound * (1.0 + 1e-12)) ++out.violations;
    }
  }
  return out;
}

double full_commutator_norm(const SpectralData& sd, const Observable& x, const Observable& y, double r) {
  const BlockOperator xr = heisenberg(sd, x, r);
  const BlockOperator yb = y.block_operator();
  return norm(xr * yb - yb * xr, NormKind::op);
}

}  // namespace droplet
