#include "droplet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "droplet/error.hpp"
#include "droplet/linalg.hpp"

namespace droplet {

bool EnergyWindow::contains(double e) const {
  const double eps_lo = std::isfinite(lo) ? tol * std::max(1.0, std::abs(lo)) : 0.0;
  const double eps_hi = std::isfinite(hi) ? tol * std::max(1.0, std::abs(hi)) : 0.0;
  const bool above = lo_closed ? e >= lo - eps_lo : e > lo + eps_lo;
  const bool below = hi_closed ? e <= hi + eps_hi : e < hi - eps_hi;
  return above && below;
}

EnergyWindow droplet_window(double delta, double delta_param, bool closed_hi) {
  if (!(delta > 1.0)) throw InvalidArgument("droplet_window: delta must exceed 1");
  if (!(delta_param >= 0.0 && delta_param < 1.0)) {
    throw InvalidArgument("droplet_window: delta parameter must lie in [0, 1)");
  }
  const double theta0 = 1.0 - 1.0 / delta;
  return EnergyWindow{theta0, (2.0 - delta_param) * theta0, true, closed_hi, 1e-12};
}

EnergyWindow with_ground_state(const EnergyWindow& w) {
  return EnergyWindow{0.0, w.hi, true, w.hi_closed, w.tol};
}

const SectorBasis& SpectralData::basis(int n_magnons) const { return bases->at(n_magnons); }

Eigen::VectorXd SpectralData::ground_state() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index{1} << n_sites());
  v(0) = 1.0;
  return v;
}

bool SpectralData::covers(const EnergyWindow& w) const {
  if (complete) return true;
  if (!computed_range) return false;
  const EnergyWindow& r = *computed_range;
  return w.lo >= r.lo && w.hi <= r.hi;
}

bool SpectralData::sector_covered(int n_magnons) const {
  return complete || (n_magnons < static_cast<int>(sector_complete.size()) && sector_complete[n_magnons]);
}

double SpectralData::cluster_tolerance() const { return 1e-10 * std::max(1.0, norm_bound); }

void rebuild_index(SpectralData& sd) {
  sd.global_index.clear();
  double max_abs = 0.0;
  for (const auto& s : sd.sectors) {
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
      sd.global_index.push_back({s.values(k), s.n_magnons, static_cast<int>(k)});
      max_abs = std::max(max_abs, std::abs(s.values(k)));
    }
  }
  if (sd.complete) sd.norm_bound = max_abs;
  std::sort(sd.global_index.begin(), sd.global_index.end(), [](const Level& a, const Level& b) {
    return std::tie(a.energy, a.sector, a.index) < std::tie(b.energy, b.sector, b.index);
  });
  sd.clusters.clear();
  const double tol = sd.cluster_tolerance();
  for (std::size_t k = 0; k < sd.global_index.size(); ++k) {
    const double e = sd.global_index[k].energy;
    if (sd.clusters.empty() || e - sd.global_index[k - 1].energy > tol) {
      sd.clusters.push_back({e, {}});
    }
    sd.clusters.back().levels.push_back(static_cast<int>(k));
  }
  for (auto& c : sd.clusters) {
    double sum = 0.0;
    for (int l : c.levels) sum += sd.global_index[l].energy;
    c.energy = sum / static_cast<double>(c.levels.size());
  }
}

SpectralData diagonalize_sectors(int half_length, std::vector<Eigen::MatrixXd> blocks,
                                 const DiagonalizeOptions& opts) {
  const int n = n_sites_of(half_length);
  if (static_cast<int>(blocks.size()) != n + 1) throw InvalidArgument("diagonalize: wrong number of sectors");
  SpectralData sd;
  sd.half_length = half_length;
  sd.bases = shared_bases(n);
  sd.has_vectors = opts.vectors;
  sd.complete = !opts.range.has_value();
  sd.computed_range = opts.range;
  double gershgorin = 0.0;
  for (int k = 0; k <= n; ++k) {
    auto& block = blocks[k];
    if (static_cast<std::size_t>(block.rows()) != sd.basis(k).dim() || block.cols() != block.rows()) {
      throw InvalidArgument("diagonalize: sector " + std::to_string(k) + " has the wrong shape");
    }
    if (block.size() > 0) gershgorin = std::max(gershgorin, block.cwiseAbs().rowwise().sum().maxCoeff());
    std::optional<std::pair<double, double>> range;
    const bool full = !opts.range || block.rows() <= 1 ||
                      std::find(opts.complete_sectors.begin(), opts.complete_sectors.end(), k) !=
                          opts.complete_sectors.end();
    sd.sector_complete.push_back(full);
    if (!full && k < static_cast<int>(opts.lower_bounds.size()) &&
        opts.lower_bounds[k] > opts.range->hi + 1e-9 * std::max(1.0, std::abs(opts.range->hi))) {
      SectorSpectrum s;
      s.n_magnons = k;
      s.values = Eigen::VectorXd(0);
      s.vectors = Eigen::MatrixXd(block.rows(), 0);
      sd.sectors.push_back(std::move(s));
      continue;
    }
    if (!full) {
      // dsyevr selects the half-open interval (vl, vu]; pad by the membership
      // tolerance and filter afterwards.
      const EnergyWindow& w = *opts.range;
      const double pad = 1e-9 * std::max(1.0, std::max(std::abs(w.lo), std::abs(w.hi)));
      range = std::make_pair(w.lo - pad, w.hi + pad);
    }
    auto eig = linalg::symmetric_eigen(std::move(block), opts.vectors, range, k);
    SectorSpectrum s;
    s.n_magnons = k;
    s.values = std::move(eig.values);
    s.vectors = std::move(eig.vectors);
    sd.sectors.push_back(std::move(s));
  }
  sd.norm_bound = gershgorin;
  rebuild_index(sd);
  return sd;
}

SpectralData diagonalize(const BlockOperator& h, int half_length, const DiagonalizeOptions& opts) {
  const int n = n_sites_of(half_length);
  if (h.n_sites() != n) throw InvalidArgument("diagonalize: chain length mismatch");
  std::vector<Eigen::MatrixXd> blocks(n + 1);
  for (const auto& [key, m] : h.blocks()) {
    if (key.first != key.second) {
      if (m.size() > 0 && m.cwiseAbs().maxCoeff() > 0.0) {
        throw InvalidArgument("diagonalize: operator couples different magnon sectors");
      }
      continue;
    }
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    const double imag = m.imag().cwiseAbs().maxCoeff();
    if (herm > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()) || imag > 1e-14) {
      throw InvalidArgument("diagonalize: sector block is not real symmetric");
    }
    blocks[key.first] = m.real();
  }
  for (int k = 0; k <= n; ++k) {
    if (blocks[k].size() == 0) {
      const auto d = static_cast<Eigen::Index>(h.sector_dim(k));
      blocks[k] = Eigen::MatrixXd::Zero(d, d);
    }
  }
  return diagonalize_sectors(half_length, std::move(blocks), opts);
}

std::optional<Eigen::Index> WindowBasis::ground_position() const {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    if (std::abs(vectors(0, k)) > 0.5) return k;
  }
  return std::nullopt;
}

WindowBasis window_basis(const SpectralData& sd, const EnergyWindow& w) {
  if (!sd.has_vectors) throw InvalidArgument("window_basis: spectrum was computed without eigenvectors");
  if (!sd.covers(w)) throw InvalidArgument("window_basis: window not covered by the computed spectrum");
  WindowBasis b;
  b.window = w;
  b.half_length = sd.half_length;
  for (std::size_t k = 0; k < sd.global_index.size(); ++k) {
    if (w.contains(sd.global_index[k].energy)) b.levels.push_back(static_cast<int>(k));
  }
  const Eigen::Index dim = Eigen::Index{1} << sd.n_sites();
  const auto count = static_cast<Eigen::Index>(b.levels.size());
  b.energies.resize(count);
  b.vectors = Eigen::MatrixXd::Zero(dim, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    const Level& lv = sd.global_index[b.levels[c]];
    b.energies(c) = lv.energy;
    const auto& states = sd.basis(lv.sector).states();
    const auto& vec = sd.sectors[lv.sector].vectors;
    for (std::size_t r = 0; r < states.size(); ++r) b.vectors(states[r], c) = vec(r, lv.index);
  }
  return b;
}

Eigen::MatrixXcd window_matrix(const WindowBasis& b, const Observable& x) {
  if (b.size() == 0) return Eigen::MatrixXcd(0, 0);
  return b.vectors.transpose().cast<cplx>() * x.apply(b.vectors);
}

WindowedOperator window_compress(const WindowBasis& b, const Observable& x) {
  return {b.window, window_matrix(b, x), b.energies};
}

WindowedOperator window_compress(const SpectralData& sd, const EnergyWindow& w, const Observable& x) {
  return window_compress(window_basis(sd, w), x);
}

Observable window_projector(const SpectralData& sd, const EnergyWindow& w) {
  if (sd.n_sites() > 12) throw CapacityError("window_projector: dense projector limited to 12 sites");
  const WindowBasis b = window_basis(sd, w);
  const Eigen::MatrixXcd p = (b.vectors * b.vectors.transpose()).cast<cplx>();
  return Observable(sd.half_length, chain_interval(sd.half_length), p);
}

BlockOperator matrix_function(const SpectralData& sd, const std::function<cplx(double)>& g,
                              const EnergyWindow& domain) {
  if (!sd.has_vectors) throw InvalidArgument("matrix_function: spectrum was computed without eigenvectors");
  if (!sd.covers(domain)) throw InvalidArgument("matrix_function: domain not covered by the spectrum");
  BlockOperator out(sd.n_sites());
  for (const auto& s : sd.sectors) {
    Eigen::VectorXcd weights(s.values.size());
    bool any = false;
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
      weights(k) = domain.contains(s.values(k)) ? g(s.values(k)) : cplx(0.0);
      any = any || weights(k) != cplx(0.0);
    }
    if (!any) continue;
    const Eigen::MatrixXcd v = s.vectors.cast<cplx>();
    out.set_block(s.n_magnons, s.n_magnons, v * weights.asDiagonal() * v.adjoint());
  }
  return out;
}

}  // namespace droplet
