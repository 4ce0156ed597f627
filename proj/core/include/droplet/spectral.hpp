#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droplet/hamiltonian.hpp"
#include "droplet/spin_core.hpp"

namespace droplet {

/// Energy interval with independently open or closed endpoints. Membership
/// uses a relative tolerance tol * max(1, |endpoint|).
struct EnergyWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = true;
  bool hi_closed = true;
  double tol = 1e-12;

  static EnergyWindow closed(double lo, double hi) { return {lo, hi, true, true, 1e-12}; }
  static EnergyWindow all() { return {}; }
  bool contains(double e) const;
};

/// I_{1,delta'} = [1 - 1/Delta, (2 - delta')(1 - 1/Delta)], upper end closed
/// or open as requested.
EnergyWindow droplet_window(double delta, double delta_param, bool closed_hi = true);
/// [0, W.hi]: the window W together with the ground state below the gap.
EnergyWindow with_ground_state(const EnergyWindow& w);

struct SectorSpectrum {
  int n_magnons = 0;
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns in SectorBasis coordinates; may be empty
};

struct Level {
  double energy;
  int sector;
  int index;  // column within the sector spectrum
};

/// Eigenvalues closer than the merge tolerance, treated as one eigenvalue.
struct Cluster {
  double energy;            // mean of the member energies
  std::vector<int> levels;  // positions in SpectralData::global_index
};

struct DiagonalizeOptions {
  bool vectors = true;
  /// Only eigenpairs in this window (plus the one-dimensional sectors) are computed.
  std::optional<EnergyWindow> range;
  /// Sectors diagonalized in full regardless of `range`.
  std::vector<int> complete_sectors;
  /// Optional proven lower bounds on each sector's spectrum. A sector whose
  /// bound lies above `range` has no eigenvalue there and is not diagonalized.
  std::vector<double> lower_bounds;
};

struct SpectralData {
  int half_length = 0;
  std::vector<SectorSpectrum> sectors;
  std::vector<Level> global_index;
  std::vector<Cluster> clusters;
  bool complete = true;
  bool has_vectors = true;
  std::optional<EnergyWindow> computed_range;
  double norm_bound = 0.0;  // upper bound on the operator norm of H
  std::vector<bool> sector_complete;

  int n_sites() const { return n_sites_of(half_length); }
  const SectorBasis& basis(int n_magnons) const;
  /// The all-up state psi_0 as a full-space vector.
  Eigen::VectorXd ground_state() const;
  /// True when every eigenpair in w has been computed.
  bool covers(const EnergyWindow& w) const;
  bool sector_covered(int n_magnons) const;
  double cluster_tolerance() const;

  std::shared_ptr<const std::vector<SectorBasis>> bases;
};

SpectralData diagonalize(const BlockOperator& h, int half_length, const DiagonalizeOptions& opts = {});
SpectralData diagonalize_sectors(int half_length, std::vector<Eigen::MatrixXd> blocks,
                                 const DiagonalizeOptions& opts = {});

/// Eigenvectors of a window embedded in the full 2^n space.
struct WindowBasis {
  EnergyWindow window;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;  // 2^n x w, orthonormal columns
  std::vector<int> levels;  // positions in SpectralData::global_index
  int half_length = 0;

  Eigen::Index size() const { return energies.size(); }
  /// Row of the ground state in this basis, if it lies in the window.
  std::optional<Eigen::Index> ground_position() const;
};

/// Recomputes global_index and clusters from the sector spectra.
void rebuild_index(SpectralData& sd);

WindowBasis window_basis(const SpectralData& sd, const EnergyWindow& w);

/// X_W = P_W X P_W in the window eigenbasis.
struct WindowedOperator {
  EnergyWindow window;
  Eigen::MatrixXcd matrix;
  Eigen::VectorXd energies;
};

Eigen::MatrixXcd window_matrix(const WindowBasis& b, const Observable& x);
WindowedOperator window_compress(const WindowBasis& b, const Observable& x);
WindowedOperator window_compress(const SpectralData& sd, const EnergyWindow& w, const Observable& x);

/// P_W as a (dense) observable on the whole chain; intended for small chains.
Observable window_projector(const SpectralData& sd, const EnergyWindow& w);

/// g(H) restricted to `domain` (g is taken as zero on eigenvalues outside it).
BlockOperator matrix_function(const SpectralData& sd, const std::function<cplx(double)>& g,
                              const EnergyWindow& domain = EnergyWindow::all());

/// Deterministic file name stem for a cached spectrum.
std::string spectral_cache_key(const ChainParams& params, std::uint64_t realization);
void save_spectral(const SpectralData& sd, const std::string& path);
SpectralData load_spectral(const std::string& path);

}  // namespace droplet
