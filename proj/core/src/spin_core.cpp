#include "droplet/spin_core.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <mutex>
#include <string>

#include "droplet/error.hpp"

namespace droplet {

namespace {

using Eigen::MatrixXcd;

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_chain(int half_length) {
  if (half_length < 1) throw InvalidArgument("half-length must be at least 1");
  if (n_sites_of(half_length) > 30) throw CapacityError("chain too long for 32-bit configurations");
}

void check_support(int half_length, const Interval& s) {
  if (s.empty()) throw InvalidArgument("support must be a nonempty interval");
  if (!chain_interval(half_length).contains(s)) {
    throw InvalidArgument("support [" + std::to_string(s.lo) + ", " + std::to_string(s.hi) +
                          "] is not inside the chain");
  }
}

}  // namespace

Interval Interval::intersect(const Interval& other) const {
  Interval r{std::max(lo, other.lo), std::min(hi, other.hi)};
  return r.empty() ? empty_interval() : r;
}

Interval Interval::hull(const Interval& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  return {std::min(lo, other.lo), std::max(hi, other.hi)};
}

Interval Interval::grown(int r, const Interval& chain) const {
  if (empty()) return *this;
  return Interval{lo - r, hi + r}.intersect(chain);
}

int distance(const Interval& a, const Interval& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("distance of an empty interval");
  if (a.hi < b.lo) return b.lo - a.hi;
  if (b.hi < a.lo) return a.lo - b.hi;
  return 0;
}

SectorBasis::SectorBasis(int n_sites, int n_magnons) : n_sites_(n_sites), n_magnons_(n_magnons) {
  if (n_sites < 1 || n_sites > 30) throw InvalidArgument("SectorBasis: bad number of sites");
  if (n_magnons < 0 || n_magnons > n_sites) throw InvalidArgument("SectorBasis: bad magnon number");
  if (n_magnons == 0) {
    states_.push_back(0);
    return;
  }
  const Config limit = Config{1} << n_sites;
  // Gosper's hack enumerates fixed-popcount words in increasing order.
  Config c = (Config{1} << n_magnons) - 1;
  while (c < limit) {
    states_.push_back(c);
    const Config lowest = c & (~c + 1);
    const Config ripple = c + lowest;
    c = (((ripple ^ c) >> 2) / lowest) | ripple;
    if (ripple == 0) break;
  }
}

std::optional<std::size_t> SectorBasis::index_of(Config c) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), c);
  if (it == states_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::vector<SectorBasis> build_bases(int half_length, int max_sites) {
  if (half_length < 1) throw InvalidArgument("build_bases: L must be at least 1");
  const int n = n_sites_of(half_length);
  if (n > max_sites || n > 30) {
    throw CapacityError("build_bases: 2L+1 = " + std::to_string(n) + " exceeds the limit of " +
                        std::to_string(max_sites) + " sites");
  }
  std::vector<SectorBasis> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) out.emplace_back(n, k);
  return out;
}

std::shared_ptr<const std::vector<SectorBasis>> shared_bases(int n_sites) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const std::vector<SectorBasis>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n_sites];
  if (!slot) {
    auto bases = std::make_shared<std::vector<SectorBasis>>();
    for (int k = 0; k <= n_sites; ++k) bases->emplace_back(n_sites, k);
    slot = bases;
  }
  return slot;
}

// ---------------------------------------------------------------- BlockOperator

BlockOperator::BlockOperator(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1 || n_sites > 30) throw InvalidArgument("BlockOperator: bad number of sites");
  bases_ = shared_bases(n_sites);
}

std::size_t BlockOperator::sector_dim(int n_magnons) const { return bases_->at(n_magnons).dim(); }

const MatrixXcd* BlockOperator::block(int to, int from) const {
  auto it = blocks_.find({to, from});
  return it == blocks_.end() ? nullptr : &it->second;
}

void BlockOperator::set_block(int to, int from, MatrixXcd m) {
  if (to < 0 || to > n_sites_ || from < 0 || from > n_sites_) {
    throw InvalidArgument("set_block: sector out of range");
  }
  if (static_cast<std::size_t>(m.rows()) != sector_dim(to) ||
      static_cast<std::size_t>(m.cols()) != sector_dim(from)) {
    throw InvalidArgument("set_block: block shape does not match sector dimensions");
  }
  blocks_[{to, from}] = std::move(m);
}

void BlockOperator::add_to_block(int to, int from, const MatrixXcd& m) {
  auto it = blocks_.find({to, from});
  if (it == blocks_.end()) {
    set_block(to, from, m);
  } else {
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw InvalidArgument("add_to_block: block shape does not match sector dimensions");
    }
    it->second += m;
  }
}

BlockOperator BlockOperator::identity(int n_sites) {
  BlockOperator out(n_sites);
  for (int k = 0; k <= n_sites; ++k) {
    const auto d = static_cast<Eigen::Index>(out.sector_dim(k));
    out.blocks_[{k, k}] = MatrixXcd::Identity(d, d);
  }
  return out;
}

BlockOperator BlockOperator::from_dense(int n_sites, const MatrixXcd& full, double drop_tol) {
  BlockOperator out(n_sites);
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  if (full.rows() != dim || full.cols() != dim) throw InvalidArgument("from_dense: wrong dimension");
  for (int to = 0; to <= n_sites; ++to) {
    const auto& bt = (*out.bases_)[to].states();
    for (int from = 0; from <= n_sites; ++from) {
      const auto& bf = (*out.bases_)[from].states();
      MatrixXcd m(bt.size(), bf.size());
      for (std::size_t i = 0; i < bt.size(); ++i)
        for (std::size_t j = 0; j < bf.size(); ++j) m(i, j) = full(bt[i], bf[j]);
      if (m.size() > 0 && m.cwiseAbs().maxCoeff() > drop_tol) out.blocks_[{to, from}] = std::move(m);
    }
  }
  return out;
}

BlockOperator BlockOperator::adjoint() const {
  BlockOperator out(n_sites_);
  for (const auto& [key, m] : blocks_) out.blocks_[{key.second, key.first}] = m.adjoint();
  return out;
}

MatrixXcd BlockOperator::to_dense() const {
  const Eigen::Index dim = Eigen::Index{1} << n_sites_;
  MatrixXcd full = MatrixXcd::Zero(dim, dim);
  for (const auto& [key, m] : blocks_) {
    const auto& bt = (*bases_)[key.first].states();
    const auto& bf = (*bases_)[key.second].states();
    for (std::size_t i = 0; i < bt.size(); ++i)
      for (std::size_t j = 0; j < bf.size(); ++j) full(bt[i], bf[j]) = m(i, j);
  }
  return full;
}

MatrixXcd BlockOperator::apply(const MatrixXcd& states) const {
  const Eigen::Index dim = Eigen::Index{1} << n_sites_;
  if (states.rows() != dim) throw InvalidArgument("BlockOperator::apply: wrong row count");
  MatrixXcd out = MatrixXcd::Zero(dim, states.cols());
  for (const auto& [key, m] : blocks_) {
    const auto& bt = (*bases_)[key.first].states();
    const auto& bf = (*bases_)[key.second].states();
    MatrixXcd gathered(bf.size(), states.cols());
    for (std::size_t j = 0; j < bf.size(); ++j) gathered.row(j) = states.row(bf[j]);
    const MatrixXcd image = m * gathered;
    for (std::size_t i = 0; i < bt.size(); ++i) out.row(bt[i]) += image.row(i);
  }
  return out;
}

double BlockOperator::max_abs_diff(const BlockOperator& other) const {
  if (other.n_sites_ != n_sites_) throw InvalidArgument("max_abs_diff: chain length mismatch");
  double worst = 0.0;
  for (const auto& [key, m] : blocks_) {
    const MatrixXcd* o = other.block(key.first, key.second);
    const double d = o ? (m - *o).cwiseAbs().maxCoeff() : m.cwiseAbs().maxCoeff();
    if (m.size() > 0) worst = std::max(worst, d);
  }
  for (const auto& [key, m] : other.blocks_) {
    if (!block(key.first, key.second) && m.size() > 0) worst = std::max(worst, m.cwiseAbs().maxCoeff());
  }
  return worst;
}

BlockOperator& BlockOperator::operator+=(const BlockOperator& other) {
  if (other.n_sites_ != n_sites_) throw InvalidArgument("BlockOperator: chain length mismatch");
  for (const auto& [key, m] : other.blocks_) add_to_block(key.first, key.second, m);
  return *this;
}

BlockOperator& BlockOperator::operator-=(const BlockOperator& other) {
  if (other.n_sites_ != n_sites_) throw InvalidArgument("BlockOperator: chain length mismatch");
  for (const auto& [key, m] : other.blocks_) add_to_block(key.first, key.second, -m);
  return *this;
}

BlockOperator& BlockOperator::operator*=(cplx s) {
  for (auto& [key, m] : blocks_) m *= s;
  return *this;
}

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
  if (a.n_sites_ != b.n_sites_) throw InvalidArgument("BlockOperator: chain length mismatch");
  BlockOperator out(a.n_sites_);
  for (const auto& [ka, ma] : a.blocks_) {
    for (const auto& [kb, mb] : b.blocks_) {
      if (ka.second != kb.first) continue;
      out.add_to_block(ka.first, kb.second, ma * mb);
    }
  }
  return out;
}

// ------------------------------------------------------------------- Observable

Observable::Observable(int half_length, Interval support, MatrixXcd local)
    : half_length_(half_length), support_(support), local_(std::move(local)) {
  check_chain(half_length);
  check_support(half_length, support);
  if (support.size() > 20) throw CapacityError("Observable: support too large for a dense local matrix");
  const Eigen::Index d = Eigen::Index{1} << support.size();
  if (local_.rows() != d || local_.cols() != d) {
    throw InvalidArgument("Observable: local matrix must be 2^|S| x 2^|S| (expected " +
                          std::to_string(d) + ")");
  }
}

MatrixXcd Observable::apply(const MatrixXcd& states) const {
  const int n = n_sites();
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (states.rows() != dim) throw InvalidArgument("Observable::apply: wrong row count");
  const int b0 = bit_of(support_.lo, half_length_);
  const int m = support_.size();
  const Eigen::Index n_low = Eigen::Index{1} << b0;
  const Eigen::Index n_mid = Eigen::Index{1} << m;
  const Eigen::Index n_high = dim / (n_low * n_mid);
  const Eigen::Index cols = states.cols();
  // Gather all (high, low, column) fibres into the columns of one matrix so a
  // single GEMM applies the local matrix.
  MatrixXcd fibres(n_mid, n_high * n_low * cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index h = 0; h < n_high; ++h) {
      for (Eigen::Index mid = 0; mid < n_mid; ++mid) {
        const Eigen::Index base = (h * n_mid + mid) * n_low;
        for (Eigen::Index l = 0; l < n_low; ++l) {
          fibres(mid, (c * n_high + h) * n_low + l) = states(base + l, c);
        }
      }
    }
  }
  const MatrixXcd image = local_ * fibres;
  MatrixXcd out(dim, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index h = 0; h < n_high; ++h) {
      for (Eigen::Index mid = 0; mid < n_mid; ++mid) {
        const Eigen::Index base = (h * n_mid + mid) * n_low;
        for (Eigen::Index l = 0; l < n_low; ++l) {
          out(base + l, c) = image(mid, (c * n_high + h) * n_low + l);
        }
      }
    }
  }
  return out;
}

MatrixXcd Observable::apply(const Eigen::MatrixXd& states) const {
  return apply(MatrixXcd(states.cast<cplx>()));
}

BlockOperator Observable::block_operator() const {
  const int n = n_sites();
  BlockOperator out(n);
  const int b0 = bit_of(support_.lo, half_length_);
  const Config mask = ((Config{1} << support_.size()) - 1) << b0;
  std::map<BlockOperator::Key, MatrixXcd> acc;
  auto bases = shared_bases(n);
  for (int from = 0; from <= n; ++from) {
    const auto& bf = (*bases)[from];
    for (std::size_t j = 0; j < bf.dim(); ++j) {
      const Config s = bf.state(j);
      const Eigen::Index mid = (s & mask) >> b0;
      for (Eigen::Index r = 0; r < local_.rows(); ++r) {
        const cplx v = local_(r, mid);
        if (v == cplx(0.0)) continue;
        const Config target = (s & ~mask) | (static_cast<Config>(r) << b0);
        const int to = std::popcount(target);
        auto& blk = acc[{to, from}];
        if (blk.size() == 0) blk = MatrixXcd::Zero((*bases)[to].dim(), bf.dim());
        blk(*(*bases)[to].index_of(target), j) += v;
      }
    }
  }
  for (auto& [key, m] : acc) out.set_block(key.first, key.second, std::move(m));
  return out;
}

MatrixXcd Observable::dense() const {
  const Eigen::Index dim = Eigen::Index{1} << n_sites();
  if (n_sites() > 14) throw CapacityError("Observable::dense: chain too long for a dense matrix");
  return apply(MatrixXcd(MatrixXcd::Identity(dim, dim)));
}

Observable Observable::adjoint() const { return Observable(half_length_, support_, local_.adjoint()); }

Observable Observable::extended_to(const Interval& larger) const {
  if (!larger.contains(support_)) throw InvalidArgument("extended_to: target does not contain support");
  const int low = support_.lo - larger.lo;
  const int high = larger.hi - support_.hi;
  const MatrixXcd id_low = MatrixXcd::Identity(Eigen::Index{1} << low, Eigen::Index{1} << low);
  const MatrixXcd id_high = MatrixXcd::Identity(Eigen::Index{1} << high, Eigen::Index{1} << high);
  return Observable(half_length_, larger, kron(id_high, kron(local_, id_low)));
}

namespace {

std::pair<Observable, Observable> on_common_support(const Observable& a, const Observable& b) {
  if (a.half_length() != b.half_length()) throw InvalidArgument("observables on different chains");
  const Interval h = a.support().hull(b.support());
  return {a.extended_to(h), b.extended_to(h)};
}

}  // namespace

Observable operator*(const Observable& a, const Observable& b) {
  auto [x, y] = on_common_support(a, b);
  return Observable(x.half_length(), x.support(), x.local() * y.local());
}

Observable operator+(const Observable& a, const Observable& b) {
  auto [x, y] = on_common_support(a, b);
  return Observable(x.half_length(), x.support(), x.local() + y.local());
}

Observable operator-(const Observable& a, const Observable& b) {
  auto [x, y] = on_common_support(a, b);
  return Observable(x.half_length(), x.support(), x.local() - y.local());
}

Observable operator*(cplx s, const Observable& a) {
  return Observable(a.half_length(), a.support(), s * a.local());
}

Observable embed_local(int half_length, const MatrixXcd& matrix, const Interval& support) {
  return Observable(half_length, support, matrix);
}

namespace pauli {
Eigen::Matrix2cd x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
Eigen::Matrix2cd y() {
  Eigen::Matrix2cd m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Eigen::Matrix2cd z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
Eigen::Matrix2cd number() {
  Eigen::Matrix2cd m;
  m << 0, 0, 0, 1;
  return m;
}
Eigen::Matrix2cd up() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, 0;
  return m;
}
}  // namespace pauli

Observable sigma_x(int half_length, int site) {
  return Observable(half_length, {site, site}, pauli::x());
}
Observable sigma_y(int half_length, int site) {
  return Observable(half_length, {site, site}, pauli::y());
}
Observable sigma_z(int half_length, int site) {
  return Observable(half_length, {site, site}, pauli::z());
}
Observable number_op(int half_length, int site) {
  return Observable(half_length, {site, site}, pauli::number());
}
Observable identity_on(int half_length, const Interval& support) {
  check_support(half_length, support);
  const Eigen::Index d = Eigen::Index{1} << support.size();
  return Observable(half_length, support, MatrixXcd::Identity(d, d));
}

Observable plus_projector(int half_length, const Interval& support) {
  check_support(half_length, support);
  const Eigen::Index d = Eigen::Index{1} << support.size();
  MatrixXcd p = MatrixXcd::Zero(d, d);
  p(0, 0) = 1.0;
  return Observable(half_length, support, std::move(p));
}

Observable minus_projector(int half_length, const Interval& support) {
  check_support(half_length, support);
  const Eigen::Index d = Eigen::Index{1} << support.size();
  MatrixXcd p = MatrixXcd::Identity(d, d);
  p(0, 0) = 0.0;
  return Observable(half_length, support, std::move(p));
}

Eigen::VectorXd plus_projector_diagonal(int half_length, const std::vector<int>& sites) {
  check_chain(half_length);
  Config mask = 0;
  for (int s : sites) {
    if (!chain_interval(half_length).contains(s)) throw InvalidArgument("site outside the chain");
    mask |= Config{1} << bit_of(s, half_length);
  }
  const Eigen::Index dim = Eigen::Index{1} << n_sites_of(half_length);
  Eigen::VectorXd d(dim);
  for (Eigen::Index c = 0; c < dim; ++c) d(c) = (static_cast<Config>(c) & mask) == 0 ? 1.0 : 0.0;
  return d;
}

PMDecomposition pm_decompose(const Observable& x) {
  const int L = x.half_length();
  const Observable pp_proj = plus_projector(L, x.support());
  const Observable mm_proj = minus_projector(L, x.support());
  const MatrixXcd& p = pp_proj.local();
  const MatrixXcd& q = mm_proj.local();
  const MatrixXcd& a = x.local();
  const cplx zeta = a(0, 0);
  return PMDecomposition{
      Observable(L, x.support(), p * a * p),
      Observable(L, x.support(), p * a * q),
      Observable(L, x.support(), q * a * p),
      Observable(L, x.support(), q * a * q),
      zeta,
  };
}

Observable compress(const Observable& z, const Interval& keep) {
  const int L = z.half_length();
  check_support(L, keep);
  // Outside the hull Z is the identity and the O-spins there are pinned up by
  // both projectors, so only the hull matters.
  const Interval hull = z.support().hull(keep);
  const Observable zh = z.extended_to(hull);
  const int offset = keep.lo - hull.lo;
  const Eigen::Index d = Eigen::Index{1} << keep.size();
  MatrixXcd out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = zh.local()(a << offset, b << offset);
  return Observable(L, keep, std::move(out));
}

Observable compress_dense(int half_length, const MatrixXcd& full, const Interval& keep) {
  check_support(half_length, keep);
  const Eigen::Index dim = Eigen::Index{1} << n_sites_of(half_length);
  if (full.rows() != dim || full.cols() != dim) throw InvalidArgument("compress_dense: wrong dimension");
  const int offset = bit_of(keep.lo, half_length);
  const Eigen::Index d = Eigen::Index{1} << keep.size();
  MatrixXcd out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = full(a << offset, b << offset);
  return Observable(half_length, keep, std::move(out));
}

bool acts_trivially_outside(int half_length, const MatrixXcd& full, const Interval& support,
                            double tol) {
  const int n = n_sites_of(half_length);
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (full.rows() != dim || full.cols() != dim) {
    throw InvalidArgument("acts_trivially_outside: wrong dimension");
  }
  const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
  const MatrixXcd ops[3] = {pauli::x(), pauli::y(), pauli::z()};
  for (int site = -half_length; site <= half_length; ++site) {
    if (support.contains(site)) continue;
    for (const auto& p : ops) {
      const Observable u(half_length, {site, site}, p);
      const MatrixXcd left = u.apply(full);
      const MatrixXcd right = u.apply(MatrixXcd(full.adjoint())).adjoint();
      if ((left - right).cwiseAbs().maxCoeff() > tol * scale) return false;
    }
  }
  return true;
}

double norm(const MatrixXcd& a, NormKind kind) {
  switch (kind) {
    case NormKind::op:
      return linalg::operator_norm(a);
    case NormKind::trace:
      return linalg::trace_norm(a);
    case NormKind::frobenius:
      return linalg::frobenius_norm(a);
  }
  return 0.0;
}

double norm(const BlockOperator& a, NormKind kind) {
  if (kind == NormKind::frobenius) {
    double s = 0.0;
    for (const auto& [key, m] : a.blocks()) s += m.squaredNorm();
    return std::sqrt(s);
  }
  // Singular values live on connected components of the bipartite graph
  // (row sectors, column sectors) whose edges are the stored blocks.
  const int n = a.n_sites();
  std::vector<int> parent(2 * (n + 1));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [key, m] : a.blocks()) parent[find(key.first)] = find(n + 1 + key.second);
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> comps;
  for (const auto& [key, m] : a.blocks()) {
    auto& c = comps[find(key.first)];
    if (std::find(c.first.begin(), c.first.end(), key.first) == c.first.end()) c.first.push_back(key.first);
    if (std::find(c.second.begin(), c.second.end(), key.second) == c.second.end())
      c.second.push_back(key.second);
  }
  double op = 0.0;
  double trace = 0.0;
  for (auto& [root, c] : comps) {
    std::sort(c.first.begin(), c.first.end());
    std::sort(c.second.begin(), c.second.end());
    Eigen::Index rows = 0, cols = 0;
    std::map<int, Eigen::Index> row_off, col_off;
    for (int s : c.first) row_off[s] = std::exchange(rows, rows + a.sector_dim(s));
    for (int s : c.second) col_off[s] = std::exchange(cols, cols + a.sector_dim(s));
    MatrixXcd m = MatrixXcd::Zero(rows, cols);
    for (const auto& [key, blk] : a.blocks()) {
      if (!row_off.count(key.first) || !col_off.count(key.second)) continue;
      m.block(row_off[key.first], col_off[key.second], blk.rows(), blk.cols()) = blk;
    }
    const Eigen::VectorXd s = linalg::singular_values(m);
    if (s.size() > 0) {
      op = std::max(op, s(0));
      trace += s.sum();
    }
  }
  return kind == NormKind::op ? op : trace;
}

}  // namespace droplet
