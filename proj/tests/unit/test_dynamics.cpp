#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "droplet/dynamics.hpp"
#include "droplet/hamiltonian.hpp"
#include "oracles.hpp"

using namespace droplet;
using Eigen::MatrixXcd;

namespace {

// Dense eigensystem of the oracle Hamiltonian.
struct Dense {
  Eigen::VectorXd e;
  MatrixXcd v;

  MatrixXcd propagator(double t, const EnergyWindow& only = EnergyWindow::all()) const {
    // e^{itH} on `only`, identity elsewhere.
    Eigen::VectorXcd d(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) {
      d(k) = only.contains(e(k)) ? std::exp(cplx(0.0, t * e(k))) : cplx(1.0);
    }
    return v * d.asDiagonal() * v.adjoint();
  }
  MatrixXcd projector(const EnergyWindow& w) const {
    Eigen::VectorXcd d(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) d(k) = w.contains(e(k)) ? 1.0 : 0.0;
    return v * d.asDiagonal() * v.adjoint();
  }
};

struct Chain {
  ChainParams params;
  DisorderRealization omega;
  SpectralData sd;
  Dense dense;
};

Chain make(std::uint64_t r) {
  Chain s;
  s.params.half_length = 2;
  s.params.delta = 2.0;
  s.params.lambda = 1.0;
  s.params.beta = 0.3;
  s.omega = sample_disorder(s.params.disorder, 2, r);
  s.sd = diagonalize(build(s.params, s.omega), 2);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
      oracle::hamiltonian(2, s.params.delta, s.params.lambda, s.params.beta, s.omega.omega));
  s.dense = {es.eigenvalues(), es.eigenvectors()};
  return s;
}

MatrixXcd ground_projector(int dim) {
  MatrixXcd p = MatrixXcd::Zero(dim, dim);
  p(0, 0) = 1.0;
  return p;
}

}  // namespace

TEST(TimeGrid, SortedUniqueAndSpansRange) {
  const auto g = default_time_grid();
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 1e3);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(std::adjacent_find(g.begin(), g.end()), g.end());
  EXPECT_GT(g.size(), 120u);
}

TEST(Heisenberg, MatchesDenseExponential) {
  const Chain s = make(0);
  std::mt19937_64 rng(31);
  for (double t : {0.0, 0.37, 5.0, 250.0}) {
    const Observable x = oracle::random_observable(2, 2, rng);
    const MatrixXcd u = s.dense.propagator(t);
    const MatrixXcd ref = u * x.dense() * u.adjoint();
    EXPECT_LT((heisenberg(s.sd, x, t).to_dense() - ref).cwiseAbs().maxCoeff(), 1e-10) << "t = " << t;
  }
}

TEST(Heisenberg, TruncatedEvolutionRotatesOnlyInsideWindow) {
  const Chain s = make(1);
  std::mt19937_64 rng(37);
  const EnergyWindow k = droplet_window(2.0, 0.5);
  const Observable x = oracle::random_observable(2, 2, rng);
  const MatrixXcd u = s.dense.propagator(3.1, k);
  const MatrixXcd ref = u * x.dense() * u.adjoint();
  EXPECT_LT((heisenberg_truncated(s.sd, x, 3.1, k).to_dense() - ref).cwiseAbs().maxCoeff(), 1e-10);
  // Window containing the whole spectrum reduces to the full evolution.
  const MatrixXcd full = heisenberg(s.sd, x, 3.1).to_dense();
  EXPECT_LT((heisenberg_truncated(s.sd, x, 3.1, EnergyWindow::all()).to_dense() - full).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WindowEvolution, PhasesConjugateTheWindowMatrix) {
  const Chain s = make(2);
  std::mt19937_64 rng(41);
  const EnergyWindow w = with_ground_state(droplet_window(2.0, 0.5));
  const WindowBasis b = window_basis(s.sd, w);
  const Observable x = oracle::random_observable(2, 2, rng);
  const double t = 7.5;
  const MatrixXcd v = b.vectors.cast<cplx>();
  const MatrixXcd u = s.dense.propagator(t);
  const MatrixXcd ref = v.adjoint() * u * x.dense() * u.adjoint() * v;
  EXPECT_LT((evolve(b, window_matrix(b, x), t) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Correlator, MatchesDenseDefinition) {
  const Chain s = make(3);
  std::mt19937_64 rng(43);
  const EnergyWindow w = with_ground_state(droplet_window(2.0, 0.5));
  const WindowBasis b = window_basis(s.sd, w);
  const Observable x = oracle::random_observable(2, 2, rng);
  const Observable y = oracle::random_observable(2, 2, rng);
  const MatrixXcd p = s.dense.projector(w);
  const MatrixXcd one = MatrixXcd::Identity(32, 32);
  const MatrixXcd v = b.vectors.cast<cplx>();
  const MatrixXcd ref = v.adjoint() * (p * x.dense() * (one - p) * y.dense() * p) * v;
  EXPECT_LT((correlator(b, x, y).matrix - ref).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Counterterm, RankOneTermsMatchDense) {
  const Chain s = make(4);
  std::mt19937_64 rng(47);
  const EnergyWindow w = EnergyWindow::closed(0.5, 3.0);
  const WindowBasis b = window_basis(s.sd, w);
  ASSERT_GT(b.size(), 0);
  const Observable x = oracle::random_observable(2, 2, rng);
  const Observable y = oracle::random_observable(2, 2, rng);
  const double t = 2.2;
  const MatrixXcd u = s.dense.propagator(t);
  const MatrixXcd tx = u * x.dense() * u.adjoint();
  const MatrixXcd p0 = ground_projector(32);
  const MatrixXcd v = b.vectors.cast<cplx>();
  const PairData pd = pair_data(b, x, y);
  const RankOneTerm a = counterterm(b, pd, t);
  const RankOneTerm c = counterterm_reversed(b, pd, t);
  EXPECT_LT((a.matrix() - v.adjoint() * tx * p0 * y.dense() * v).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT((c.matrix() - v.adjoint() * y.dense() * p0 * tx * v).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_NEAR(a.norm(), oracle::trace_norm(a.matrix()), 1e-11);
}

TEST(DoubleBracket, MatchesDenseFormula) {
  std::mt19937_64 rng(53);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const Chain s = make(10 + r);
    for (const EnergyWindow& k : {EnergyWindow::closed(0.5, 3.0), EnergyWindow::closed(0.0, 2.0)}) {
      const WindowBasis b = window_basis(s.sd, k);
      ASSERT_GT(b.size(), 0);
      const Observable x = oracle::random_observable(2, 2, rng);
      const Observable y = oracle::random_observable(2, 2, rng);
      for (double t : {0.0, 1.3, 40.0}) {
        const MatrixXcd u = s.dense.propagator(t, k);
        const MatrixXcd tx = u * x.dense() * u.adjoint();
        const MatrixXcd ty = u * y.dense() * u.adjoint();
        const MatrixXcd xd = x.dense(), yd = y.dense();
        const MatrixXcd p0 = ground_projector(32);
        const MatrixXcd full = (tx * yd - yd * tx) - (tx * p0 * yd + ty * p0 * xd) + (yd * p0 * tx + xd * p0 * ty);
        const MatrixXcd v = b.vectors.cast<cplx>();
        const MatrixXcd ref = v.adjoint() * full * v;
        EXPECT_LT((double_bracket(b, x, y, t).matrix - ref).cwiseAbs().maxCoeff(), 1e-10)
            << "realization " << r << " t = " << t;
      }
    }
  }
}

TEST(DoubleBracket, VanishesForIdentity) {
  const Chain s = make(20);
  std::mt19937_64 rng(59);
  const WindowBasis b = window_basis(s.sd, EnergyWindow::closed(0.5, 3.0));
  const Observable x = oracle::random_observable(2, 2, rng);
  const Observable one(2, {0, 0}, MatrixXcd::Identity(2, 2));
  EXPECT_LT(double_bracket(b, x, one, 4.0).matrix.cwiseAbs().maxCoeff(), 1e-12);
}
