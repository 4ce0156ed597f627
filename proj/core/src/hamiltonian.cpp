#include "droplet/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <string>

#include "droplet/error.hpp"
#include "droplet/linalg.hpp"

namespace droplet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

void check_omega(const ChainParams& params, const DisorderRealization& omega) {
  params.validate();
  if (omega.omega.size() != params.n_sites()) {
    throw InvalidArgument("disorder realization has " + std::to_string(omega.omega.size()) +
                          " entries, expected " + std::to_string(params.n_sites()));
  }
}

}  // namespace

void ChainParams::validate() const {
  if (!(delta > 1.0)) throw InvalidArgument("anisotropy delta must exceed 1");
  if (!(lambda >= 0.0)) throw InvalidArgument("disorder strength lambda must be nonnegative");
  if (half_length < 1) throw InvalidArgument("half-length L must be at least 1");
  if (!allow_small_beta && beta < min_beta(delta) - 1e-15) {
    throw InvalidArgument("boundary weight beta = " + std::to_string(beta) +
                          " is below 0.5*(1 - 1/delta) = " + std::to_string(min_beta(delta)));
  }
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return (static_cast<double>(key(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

DisorderRealization sample_disorder(const DisorderSpec& spec, int half_length, std::uint64_t realization) {
  if (half_length < 1) throw InvalidArgument("sample_disorder: L must be at least 1");
  const int n = n_sites_of(half_length);
  DisorderRealization out;
  out.seed = spec.seed;
  out.index = realization;
  out.omega.resize(n);
  switch (spec.kind) {
    case DisorderKind::uniform01:
      for (int k = 0; k < n; ++k) out.omega(k) = counter_uniform(spec.seed, realization, k);
      break;
    case DisorderKind::iid_density:
      if (!spec.inverse_cdf) throw InvalidArgument("iid-density disorder needs an inverse CDF");
      for (int k = 0; k < n; ++k) out.omega(k) = spec.inverse_cdf(counter_uniform(spec.seed, realization, k));
      break;
    case DisorderKind::ergodic_shift: {
      if (!spec.generator) throw InvalidArgument("ergodic-shift disorder needs a generator");
      const auto shift = static_cast<std::int64_t>(key(spec.seed, realization, ~0ULL) >> 33);
      for (int k = 0; k < n; ++k) out.omega(k) = spec.generator(shift + k);
      break;
    }
  }
  for (int k = 0; k < n; ++k) {
    if (!(out.omega(k) >= 0.0 && out.omega(k) <= 1.0)) {
      throw InvalidArgument("disorder sample outside [0, 1]: " + std::to_string(out.omega(k)));
    }
  }
  return out;
}

Eigen::Matrix4d local_term(double delta) {
  if (!(delta > 1.0)) throw InvalidArgument("local_term: delta must exceed 1");
  // Basis |b1 b0> with b = 1 meaning spin down; aligned pairs cost nothing,
  // anti-aligned pairs cost 1/2 and hop with amplitude -1/(2 delta).
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(1, 1) = 0.5;
  h(2, 2) = 0.5;
  h(1, 2) = -0.5 / delta;
  h(2, 1) = -0.5 / delta;
  return h;
}

std::vector<Eigen::MatrixXd> build_sector_matrices(const ChainParams& params,
                                                   const DisorderRealization& omega) {
  check_omega(params, omega);
  const int n = params.n_sites();
  const auto bases = build_bases(params.half_length, 30);
  const double hop = -0.5 / params.delta;
  const Config edges = Config{1} | (Config{1} << (n - 1));
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(bases.size());
  for (const auto& basis : bases) {
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const Config s = basis.state(a);
      double diag = params.beta * std::popcount(s & edges);
      for (int k = 0; k < n; ++k) {
        if ((s >> k) & 1U) diag += params.lambda * omega.omega(k);
      }
      for (int k = 0; k + 1 < n; ++k) {
        const Config pair = (s >> k) & 3U;
        if (pair == 1U || pair == 2U) {
          diag += 0.5;
          const auto b = basis.index_of(s ^ (Config{3} << k));
          h(*b, a) = hop;
        }
      }
      h(a, a) = diag;
    }
    blocks.push_back(std::move(h));
  }
  return blocks;
}

BlockOperator build(const ChainParams& params, const DisorderRealization& omega) {
  auto blocks = build_sector_matrices(params, omega);
  BlockOperator out(params.n_sites());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    out.set_block(static_cast<int>(k), static_cast<int>(k), blocks[k].cast<cplx>());
  }
  return out;
}

Eigen::MatrixXd one_magnon_anderson(const ChainParams& params, const DisorderRealization& omega) {
  check_omega(params, omega);
  const int n = params.n_sites();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const bool edge = (k == 0 || k == n - 1);
    a(k, k) = (edge ? 0.5 + params.beta : 1.0) + params.lambda * omega.omega(k);
    if (k + 1 < n) {
      a(k, k + 1) = -0.5 / params.delta;
      a(k + 1, k) = -0.5 / params.delta;
    }
  }
  return a;
}

std::vector<double> clean_sector_minima(const ChainParams& params) {
  params.validate();
  static std::mutex mutex;
  static std::map<std::tuple<double, double, int>, std::vector<double>> memo;
  const auto key = std::make_tuple(params.delta, params.beta, params.half_length);
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  ChainParams clean = params;
  clean.lambda = 0.0;
  DisorderRealization zero;
  zero.omega = Eigen::VectorXd::Zero(params.n_sites());
  auto blocks = build_sector_matrices(clean, zero);
  std::vector<double> minima;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto eig = linalg::symmetric_eigen(std::move(blocks[k]), false, std::nullopt, static_cast<int>(k));
    minima.push_back(eig.values.minCoeff());
  }
  std::lock_guard lock(mutex);
  memo.emplace(key, minima);
  return minima;
}

std::vector<double> sector_lower_bounds(const ChainParams& params, const DisorderRealization& omega) {
  check_omega(params, omega);
  std::vector<double> bounds = clean_sector_minima(params);
  std::vector<double> fields(omega.omega.data(), omega.omega.data() + omega.omega.size());
  std::sort(fields.begin(), fields.end());
  double partial = 0.0;
  for (std::size_t k = 1; k < bounds.size(); ++k) {
    partial += fields[k - 1];
    bounds[k] += params.lambda * partial;
  }
  return bounds;
}

}  // namespace droplet
