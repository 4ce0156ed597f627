#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droplet/spin_core.hpp"

namespace droplet {

enum class DisorderKind { uniform01, iid_density, ergodic_shift };

/// How the single-site field values omega_i in [0, 1] are drawn.
struct DisorderSpec {
  DisorderKind kind = DisorderKind::uniform01;
  std::uint64_t seed = 0;
  /// iid_density: inverse CDF applied to a uniform draw in (0, 1).
  std::function<double(double)> inverse_cdf;
  /// ergodic_shift: omega_i = generator(shift + i) where the shift is keyed by
  /// (seed, realization).
  std::function<double(std::int64_t)> generator;
};

struct ChainParams {
  double delta = 4.0;
  double lambda = 4.0;
  double beta = 0.375;
  int half_length = 6;
  DisorderSpec disorder;
  /// Allows beta below the gap-preserving minimum (off by default).
  bool allow_small_beta = false;

  int n_sites() const { return n_sites_of(half_length); }
  /// Smallest boundary weight that keeps the gap 1 - 1/delta open.
  static double min_beta(double delta) { return 0.5 * (1.0 - 1.0 / delta); }
  /// Throws InvalidArgument when the parameters are out of range.
  void validate() const;
};

struct DisorderRealization {
  Eigen::VectorXd omega;  // omega(k) is the field at site k - L
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Counter-based uniform draw in (0, 1) keyed by (seed, stream, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

DisorderRealization sample_disorder(const DisorderSpec& spec, int half_length, std::uint64_t realization);

/// Nearest-neighbour term on two sites; local bit 0 is the left site.
Eigen::Matrix4d local_term(double delta);

/// Real symmetric blocks of H, one per magnon sector, in SectorBasis order.
std::vector<Eigen::MatrixXd> build_sector_matrices(const ChainParams& params,
                                                   const DisorderRealization& omega);
BlockOperator build(const ChainParams& params, const DisorderRealization& omega);

/// H restricted to one-magnon states; row k corresponds to a down spin at site k - L.
Eigen::MatrixXd one_magnon_anderson(const ChainParams& params, const DisorderRealization& omega);

/// Smallest eigenvalue of each magnon sector at lambda = 0. Memoized per (delta, beta, L).
std::vector<double> clean_sector_minima(const ChainParams& params);

/// Rigorous lower bound on the spectrum of each sector: the disorder term is
/// diagonal, so by Weyl's inequality the sector-N minimum is at least the clean
/// minimum plus lambda times the sum of the N smallest fields.
std::vector<double> sector_lower_bounds(const ChainParams& params, const DisorderRealization& omega);

}  // namespace droplet
