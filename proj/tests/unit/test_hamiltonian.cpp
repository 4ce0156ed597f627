#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "droplet/error.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/linalg.hpp"
#include "oracles.hpp"

using namespace droplet;

TEST(Hamiltonian, MatchesPauliOracle) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    ChainParams p;
    p.delta = 1.2 + 5.0 * u(rng);
    p.lambda = 3.0 * u(rng);
    p.beta = ChainParams::min_beta(p.delta) + u(rng);
    p.half_length = 1 + trial % 3;
    const auto omega = sample_disorder(p.disorder, p.half_length, static_cast<std::uint64_t>(trial));
    const Eigen::MatrixXcd ref = oracle::hamiltonian(p.half_length, p.delta, p.lambda, p.beta, omega.omega);
    EXPECT_LT((build(p, omega).to_dense() - ref).cwiseAbs().maxCoeff(), 1e-13) << "trial " << trial;
  }
}

TEST(LocalTerm, SpectrumAndEntries) {
  const Eigen::Matrix4d h = local_term(2.0);
  EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  Eigen::Vector4d e = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(h).eigenvalues();
  EXPECT_LT((e - Eigen::Vector4d(0.0, 0.0, 0.25, 0.75)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(h(0, 0), 0.0);
  EXPECT_EQ(h(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(h(1, 2), -0.25);
  EXPECT_THROW(local_term(1.0), InvalidArgument);
}

TEST(Hamiltonian, OneMagnonMatrixWithoutDisorder) {
  ChainParams p;
  p.delta = 2.0;
  p.lambda = 0.0;
  p.beta = 0.25;
  p.half_length = 2;
  DisorderRealization zero;
  zero.omega = Eigen::VectorXd::Zero(5);
  const Eigen::MatrixXd a = one_magnon_anderson(p, zero);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(5, 5);
  ref.diagonal() << 0.75, 1.0, 1.0, 1.0, 0.75;
  for (int k = 0; k < 4; ++k) ref(k, k + 1) = ref(k + 1, k) = -0.25;
  EXPECT_LT((a - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, GroundStateAnnihilatedAndSectorsDecoupled) {
  ChainParams p;
  p.half_length = 3;
  const auto omega = sample_disorder(p.disorder, 3, 2);
  const Eigen::MatrixXcd h = oracle::hamiltonian(3, p.delta, p.lambda, p.beta, omega.omega);
  EXPECT_LT(h.col(0).norm(), 1e-14);
  // Entries between basis states of different magnon number vanish.
  double off = 0.0;
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      if (__builtin_popcountll(r) != __builtin_popcountll(c)) off = std::max(off, std::abs(h(r, c)));
    }
  }
  EXPECT_LT(off, 1e-14);
  EXPECT_LT((build(p, omega).to_dense() - h).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Hamiltonian, OneMagnonBlockIsAndersonModel) {
  ChainParams p;
  p.half_length = 3;
  const auto omega = sample_disorder(p.disorder, 3, 4);
  const Eigen::MatrixXd a = one_magnon_anderson(p, omega);
  EXPECT_LT((build_sector_matrices(p, omega)[1] - a).cwiseAbs().maxCoeff(), 1e-15);
  // Interior diagonal 1 + lambda omega, edges 1/2 + beta + lambda omega, hopping -1/(2 Delta).
  EXPECT_DOUBLE_EQ(a(3, 3), 1.0 + p.lambda * omega.omega(3));
  EXPECT_DOUBLE_EQ(a(0, 0), 0.5 + p.beta + p.lambda * omega.omega(0));
  EXPECT_DOUBLE_EQ(a(2, 3), -0.5 / p.delta);
  EXPECT_DOUBLE_EQ(a(0, 2), 0.0);
}

TEST(Hamiltonian, GroundStateIsAllUpWithZeroEnergy) {
  ChainParams p;
  p.half_length = 2;
  const auto omega = sample_disorder(p.disorder, 2, 9);
  const auto blocks = build_sector_matrices(p, omega);
  ASSERT_EQ(blocks[0].rows(), 1);
  EXPECT_EQ(blocks[0](0, 0), 0.0);
  // Every other sector sits above the gap 1 - 1/Delta.
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    const double lo = linalg::symmetric_eigen(blocks[k], false).values.minCoeff();
    EXPECT_GE(lo, 1.0 - 1.0 / p.delta - 1e-12);
  }
}

TEST(Disorder, CounterBasedAndReproducible) {
  DisorderSpec spec;
  spec.seed = 77;
  const auto a = sample_disorder(spec, 4, 12);
  const auto b = sample_disorder(spec, 4, 12);
  const auto c = sample_disorder(spec, 4, 13);
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_NE(a.omega, c.omega);
  EXPECT_TRUE((a.omega.array() > 0.0).all() && (a.omega.array() < 1.0).all());
  EXPECT_EQ(counter_uniform(1, 2, 3), counter_uniform(1, 2, 3));
}

TEST(Disorder, UniformMoments) {
  DisorderSpec spec;
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    const double w = sample_disorder(spec, 1, static_cast<std::uint64_t>(r)).omega(0);
    sum += w;
    sq += w * w;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.01);
}

TEST(Disorder, CustomDensityAndErgodicShift) {
  DisorderSpec spec;
  spec.kind = DisorderKind::iid_density;
  spec.inverse_cdf = [](double u) { return u * u; };
  const auto a = sample_disorder(spec, 3, 1);
  EXPECT_TRUE((a.omega.array() >= 0.0).all() && (a.omega.array() <= 1.0).all());
  spec.kind = DisorderKind::ergodic_shift;
  spec.generator = [](std::int64_t) { return 0.3; };
  EXPECT_TRUE((sample_disorder(spec, 3, 1).omega.array() == 0.3).all());
  spec.generator = [](std::int64_t k) { return 0.5 + 0.5 * std::sin(static_cast<double>(k)); };
  const auto b = sample_disorder(spec, 3, 1);
  EXPECT_TRUE((b.omega.array() >= 0.0).all() && (b.omega.array() <= 1.0).all());
  spec.generator = [](std::int64_t) { return 1.5; };
  EXPECT_THROW(sample_disorder(spec, 3, 1), InvalidArgument);
}

TEST(Params, ValidationRejectsBadValues) {
  ChainParams p;
  p.delta = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = ChainParams{};
  p.beta = 0.1;  // below (1 - 1/4)/2
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.allow_small_beta = true;
  EXPECT_NO_THROW(p.validate());
  p = ChainParams{};
  p.lambda = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(SectorBounds, BelowEveryExactSectorMinimum) {
  ChainParams p;
  p.half_length = 3;
  for (std::uint64_t r = 0; r < 6; ++r) {
    const auto omega = sample_disorder(p.disorder, 3, r);
    const auto bounds = sector_lower_bounds(p, omega);
    const auto blocks = build_sector_matrices(p, omega);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const double lo = linalg::symmetric_eigen(blocks[k], false).values.minCoeff();
      EXPECT_LE(bounds[k], lo + 1e-12) << "sector " << k;
    }
  }
  const auto clean = clean_sector_minima(p);
  EXPECT_EQ(clean[0], 0.0);
  ChainParams q = p;
  q.lambda = 0.0;
  DisorderRealization zero;
  zero.omega = Eigen::VectorXd::Zero(7);
  const auto blocks = build_sector_matrices(q, zero);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    EXPECT_NEAR(clean[k], linalg::symmetric_eigen(blocks[k], false).values.minCoeff(), 1e-12);
  }
}
