#pragma once

// Spin-1/2 chain on sites [-L, L]. Computational basis states are bit
// configurations: bit k set <=> spin down at site k - L. A magnon sector
// holds all configurations with a fixed number of down spins.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "droplet/linalg.hpp"

namespace droplet {

using Config = std::uint32_t;

/// Largest chain (number of sites) accepted by build_bases by default.
inline constexpr int kDefaultMaxSites = 21;

/// Integer interval [lo, hi] of signed sites; empty when lo > hi.
struct Interval {
  int lo = 0;
  int hi = -1;

  static Interval empty_interval() { return {0, -1}; }
  bool empty() const { return lo > hi; }
  int size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(int site) const { return site >= lo && site <= hi; }
  bool contains(const Interval& other) const {
    return other.empty() || (!empty() && other.lo >= lo && other.hi <= hi);
  }
  Interval intersect(const Interval& other) const;
  /// Smallest interval containing both (empty operands are ignored).
  Interval hull(const Interval& other) const;
  /// [lo - r, hi + r] clipped to `chain`.
  Interval grown(int r, const Interval& chain) const;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// dist(A, B) = min |a - b|; zero when the intervals overlap.
int distance(const Interval& a, const Interval& b);

inline Interval chain_interval(int half_length) { return {-half_length, half_length}; }
inline int n_sites_of(int half_length) { return 2 * half_length + 1; }
inline int bit_of(int site, int half_length) { return site + half_length; }

class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_magnons);

  int n_sites() const { return n_sites_; }
  int n_magnons() const { return n_magnons_; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<Config>& states() const { return states_; }
  Config state(std::size_t k) const { return states_[k]; }
  std::optional<std::size_t> index_of(Config c) const;

 private:
  int n_sites_;
  int n_magnons_;
  std::vector<Config> states_;
};

/// One basis per magnon number 0..2L+1. Throws CapacityError when
/// 2L+1 exceeds `max_sites`.
std::vector<SectorBasis> build_bases(int half_length, int max_sites = kDefaultMaxSites);
/// Process-wide cached bases for a chain of `n_sites` sites.
std::shared_ptr<const std::vector<SectorBasis>> shared_bases(int n_sites);

/// Sector-resolved operator: blocks keyed by (magnons_to, magnons_from).
/// Absent blocks are zero.
class BlockOperator {
 public:
  using Key = std::pair<int, int>;

  explicit BlockOperator(int n_sites);

  static BlockOperator identity(int n_sites);
  static BlockOperator from_dense(int n_sites, const Eigen::MatrixXcd& full, double drop_tol = 0.0);

  int n_sites() const { return n_sites_; }
  std::size_t sector_dim(int n_magnons) const;
  const std::map<Key, Eigen::MatrixXcd>& blocks() const { return blocks_; }
  const Eigen::MatrixXcd* block(int to, int from) const;
  void set_block(int to, int from, Eigen::MatrixXcd m);
  void add_to_block(int to, int from, const Eigen::MatrixXcd& m);

  BlockOperator adjoint() const;
  /// Dense 2^n x 2^n matrix in configuration order.
  Eigen::MatrixXcd to_dense() const;
  /// Applies to full-space column vectors (configuration order).
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& states) const;
  /// Largest entrywise difference, treating absent blocks as zero.
  double max_abs_diff(const BlockOperator& other) const;

  BlockOperator& operator+=(const BlockOperator& other);
  BlockOperator& operator-=(const BlockOperator& other);
  BlockOperator& operator*=(cplx s);
  friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
  friend BlockOperator operator-(BlockOperator a, const BlockOperator& b) { return a -= b; }
  friend BlockOperator operator*(cplx s, BlockOperator a) { return a *= s; }
  friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b);

 private:
  int n_sites_;
  std::shared_ptr<const std::vector<SectorBasis>> bases_;
  std::map<Key, Eigen::MatrixXcd> blocks_;
};

/// Local observable: a matrix on the sites of `support` (site `support.lo` is
/// the least significant local bit), acting as the identity elsewhere.
class Observable {
 public:
  Observable(int half_length, Interval support, Eigen::MatrixXcd local);

  int half_length() const { return half_length_; }
  int n_sites() const { return n_sites_of(half_length_); }
  const Interval& support() const { return support_; }
  const Eigen::MatrixXcd& local() const { return local_; }

  /// Acts on full-space column vectors (2^n rows).
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& states) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXd& states) const;
  BlockOperator block_operator() const;
  Eigen::MatrixXcd dense() const;
  Observable adjoint() const;
  /// Same operator written on a larger support.
  Observable extended_to(const Interval& larger) const;
  double norm() const { return linalg::operator_norm(local_); }

 private:
  int half_length_;
  Interval support_;
  Eigen::MatrixXcd local_;
};

Observable operator*(const Observable& a, const Observable& b);
Observable operator+(const Observable& a, const Observable& b);
Observable operator-(const Observable& a, const Observable& b);
Observable operator*(cplx s, const Observable& a);

/// Wraps a 2^|S| x 2^|S| matrix as an observable supported on S.
Observable embed_local(int half_length, const Eigen::MatrixXcd& matrix, const Interval& support);

namespace pauli {
Eigen::Matrix2cd x();
Eigen::Matrix2cd y();
Eigen::Matrix2cd z();
Eigen::Matrix2cd number();  // projection onto spin down
Eigen::Matrix2cd up();      // projection onto spin up
}  // namespace pauli

Observable sigma_x(int half_length, int site);
Observable sigma_y(int half_length, int site);
Observable sigma_z(int half_length, int site);
/// Local number operator N_i = (1 - sigma^z_i)/2.
Observable number_op(int half_length, int site);
Observable identity_on(int half_length, const Interval& support);

/// P_+^(S): all spins in S up. Throws on empty S.
Observable plus_projector(int half_length, const Interval& support);
Observable minus_projector(int half_length, const Interval& support);
/// P_+ over an arbitrary site set (used for complements that are not intervals).
Eigen::VectorXd plus_projector_diagonal(int half_length, const std::vector<int>& sites);

struct PMDecomposition {
  Observable pp;
  Observable pm;
  Observable mp;
  Observable mm;
  cplx zeta;
};

PMDecomposition pm_decompose(const Observable& x);

/// The observable Z~ on `keep` with P_+^(O) Z P_+^(O) = Z~ P_+^(O), where O
/// is the complement of `keep` in the chain.
Observable compress(const Observable& z, const Interval& keep);
/// Same construction for an operator given densely on the full space.
Observable compress_dense(int half_length, const Eigen::MatrixXcd& full, const Interval& keep);

/// True when `full` commutes with sigma^{x,y,z} at every site outside
/// `support`, i.e. it acts as the identity there (up to the scalar factor
/// carried by its restriction).
bool acts_trivially_outside(int half_length, const Eigen::MatrixXcd& full, const Interval& support,
                            double tol);

enum class NormKind { op, trace, frobenius };

double norm(const BlockOperator& a, NormKind kind);
double norm(const Eigen::MatrixXcd& a, NormKind kind);

}  // namespace droplet
