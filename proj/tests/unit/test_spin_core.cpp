#include <gtest/gtest.h>

#include <random>

#include "droplet/error.hpp"
#include "droplet/spin_core.hpp"
#include "oracles.hpp"

using namespace droplet;

namespace {

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Interval, GrowIntersectDistance) {
  const Interval chain = chain_interval(4);
  EXPECT_EQ((Interval{-1, 1}.grown(2, chain)), (Interval{-3, 3}));
  EXPECT_EQ((Interval{-1, 1}.grown(9, chain)), chain);
  EXPECT_EQ((Interval{-2, 0}.intersect({0, 3})), (Interval{0, 0}));
  EXPECT_TRUE((Interval{-2, -1}.intersect({1, 3})).empty());
  EXPECT_EQ(distance({-3, -2}, {2, 4}), 4);
  EXPECT_EQ(distance({-3, 1}, {0, 4}), 0);
  EXPECT_EQ((Interval{-3, -2}.hull({2, 4})), (Interval{-3, 4}));
}

TEST(SectorBasis, DimensionsAreBinomialAndIndexRoundTrips) {
  const auto bases = build_bases(3);
  ASSERT_EQ(bases.size(), 8u);
  for (int k = 0; k <= 7; ++k) {
    EXPECT_EQ(static_cast<long>(bases[k].dim()), binomial(7, k));
    for (std::size_t a = 0; a < bases[k].dim(); ++a) {
      EXPECT_EQ(__builtin_popcount(bases[k].state(a)), k);
      EXPECT_EQ(bases[k].index_of(bases[k].state(a)), a);
      if (a > 0) EXPECT_LT(bases[k].state(a - 1), bases[k].state(a));
    }
  }
  EXPECT_FALSE(bases[2].index_of(0b111).has_value());
  EXPECT_THROW(build_bases(12, 21), CapacityError);
}

TEST(Observable, ApplyMatchesKroneckerOracle) {
  const int L = 2, n = 5;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Observable x = oracle::random_observable(L, 3, rng);
    // Oracle: local matrix on consecutive bits via Kronecker products.
    const int lo = bit_of(x.support().lo, L);
    const int len = x.support().size();
    const auto left = Eigen::Index{1} << (n - lo - len);
    const auto right = Eigen::Index{1} << lo;
    const Eigen::MatrixXcd full = oracle::kron(oracle::kron(Eigen::MatrixXcd::Identity(left, left), x.local()),
                                               Eigen::MatrixXcd::Identity(right, right));
    EXPECT_LT((x.dense() - full).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((x.block_operator().to_dense() - full).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::MatrixXcd v = oracle::random_matrix(32, rng).leftCols(3);
    EXPECT_LT((x.apply(v) - full * v).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(x.norm(), oracle::op_norm(full), 1e-12);
  }
}

TEST(Observable, PauliAlgebra) {
  const int L = 2;
  const auto sx = sigma_x(L, 1), sy = sigma_y(L, 1), sz = sigma_z(L, 1);
  const Eigen::MatrixXcd prod = (sx * sy).dense();
  EXPECT_LT((prod - cplx(0, 1) * sz.dense()).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::MatrixXcd n = number_op(L, -2).dense();
  EXPECT_LT((n - oracle::number(0, 5)).cwiseAbs().maxCoeff(), 1e-15);
  // sigma^x at different sites commute.
  const auto a = sigma_x(L, -1), b = sigma_x(L, 2);
  EXPECT_LT(((a * b).dense() - (b * a).dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Observable, ExtendedToKeepsOperator) {
  std::mt19937_64 rng(5);
  const Observable x = oracle::random_observable(3, 2, rng);
  const Observable big = x.extended_to(chain_interval(3));
  EXPECT_LT((big.dense() - x.dense()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PlusMinus, DecompositionSumsBackAndZetaIsTopEntry) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Observable x = oracle::random_observable(2, 2, rng);
    const auto d = pm_decompose(x);
    const Eigen::MatrixXcd sum = d.pp.dense() + d.pm.dense() + d.mp.dense() + d.mm.dense();
    EXPECT_LT((sum - x.dense()).cwiseAbs().maxCoeff(), 1e-13);
    // zeta = <up..up| X |up..up> on the support.
    EXPECT_NEAR(std::abs(d.zeta - x.local()(0, 0)), 0.0, 1e-14);
  }
}

TEST(PlusMinus, ProjectorsAreComplementary) {
  const int L = 2;
  const Interval s{-1, 0};
  const Eigen::MatrixXcd p = plus_projector(L, s).dense();
  const Eigen::MatrixXcd m = minus_projector(L, s).dense();
  EXPECT_LT((p + m - Eigen::MatrixXcd::Identity(32, 32)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-15);
  // P_- is dominated by the number operators on S.
  const Eigen::MatrixXcd nsum = number_op(L, -1).dense() + number_op(L, 0).dense();
  const Eigen::VectorXcd diff = (nsum - m).diagonal();
  for (Eigen::Index k = 0; k < diff.size(); ++k) EXPECT_GE(diff(k).real(), -1e-15);
}

TEST(Compress, ReproducesPlusSandwich) {
  // P_+^(O) Z P_+^(O) = Z~ P_+^(O) for O the complement of `keep`.
  const int L = 2;
  std::mt19937_64 rng(11);
  const Observable z(L, chain_interval(L), oracle::random_matrix(32, rng));
  const Interval keep{-1, 1};
  const Observable zt = compress(z, keep);
  EXPECT_EQ(zt.support(), keep);
  const Eigen::VectorXd po = plus_projector_diagonal(L, {-2, 2});
  const Eigen::MatrixXcd p = po.cast<cplx>().asDiagonal();
  const Eigen::MatrixXcd lhs = p * z.dense() * p;
  const Eigen::MatrixXcd rhs = zt.dense() * p;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
  const Observable zd = compress_dense(L, z.dense(), keep);
  EXPECT_LT((zd.dense() - zt.dense()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Support, IdentityOutsideDetection) {
  const int L = 2;
  std::mt19937_64 rng(13);
  const Observable x(L, {0, 1}, oracle::random_matrix(4, rng));
  EXPECT_TRUE(acts_trivially_outside(L, x.dense(), {0, 1}, 1e-12));
  EXPECT_FALSE(acts_trivially_outside(L, x.dense(), {1, 1}, 1e-12));
}

TEST(Norms, MatchSingularValueOracle) {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXcd a = oracle::random_matrix(9, rng);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  EXPECT_NEAR(norm(a, NormKind::op), svd.singularValues()(0), 1e-12);
  EXPECT_NEAR(norm(a, NormKind::trace), svd.singularValues().sum(), 1e-12);
  EXPECT_NEAR(norm(a, NormKind::frobenius), a.norm(), 1e-12);
  // Trace norm of a rank-deficient product without forming it.
  const Eigen::MatrixXcd left = oracle::random_matrix(40, rng).leftCols(3);
  const Eigen::MatrixXcd right = oracle::random_matrix(40, rng).leftCols(3);
  const Eigen::VectorXcd w = Eigen::VectorXcd::Random(3);
  EXPECT_NEAR(linalg::trace_norm_low_rank(left, w, right),
              oracle::trace_norm(left * w.asDiagonal() * right.adjoint()), 1e-11);
}

TEST(BlockOperatorAlgebra, DenseRoundTripAndProduct) {
  std::mt19937_64 rng(19);
  const Observable x = oracle::random_observable(1, 2, rng);
  const Observable y = oracle::random_observable(1, 2, rng);
  const BlockOperator bx = x.block_operator(), by = y.block_operator();
  EXPECT_LT(((bx * by).to_dense() - x.dense() * y.dense()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((bx.adjoint().to_dense() - x.dense().adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  const BlockOperator back = BlockOperator::from_dense(3, x.dense());
  EXPECT_LT(back.max_abs_diff(bx), 1e-15);
}
