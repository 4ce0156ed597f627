#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "droplet/error.hpp"
#include "droplet/filters.hpp"
#include "droplet/hamiltonian.hpp"
#include "oracles.hpp"

using namespace droplet;

namespace {

FilterSpec spec(double t2, double t1, double t3, double alpha) {
  FilterSpec s;
  s.theta2 = t2;
  s.theta1 = t1;
  s.theta3 = t3;
  s.alpha = alpha;
  return s;
}

SpectralData small_chain(std::uint64_t r) {
  ChainParams p;
  p.half_length = 2;
  p.delta = 2.0;
  p.lambda = 1.0;
  p.beta = 0.3;
  return diagonalize(build(p, sample_disorder(p.disorder, 2, r)), 2);
}

}  // namespace

TEST(GevreyBump, NormalizedSymmetricAndCompactlySupported) {
  for (double alpha : {0.3, 0.5, 0.6}) {
    const SampledFunction h = gevrey_bump(1.0, alpha);
    EXPECT_NEAR(h.integral(), 1.0, 1e-10) << "alpha " << alpha;
    EXPECT_EQ(h(-0.01), 0.0);
    EXPECT_EQ(h(1.01), 0.0);
    EXPECT_NEAR(h(0.3), h(0.7), 1e-9);
    EXPECT_GT(h(0.5), h(0.2));
    EXPECT_TRUE((h.values.array() >= 0.0).all());
  }
}

TEST(Filter, PlateauSupportAndRange) {
  const Filter f(spec(0.5, 1.0, 2.0, 0.5));
  EXPECT_DOUBLE_EQ(f.spec().support_hi(), 2.5);
  for (double x : {1.0, 1.3, 1.7, 2.0}) EXPECT_NEAR(f(x), 1.0, 1e-12) << x;
  for (double x : {0.0, 0.5, 2.5, 3.0}) EXPECT_NEAR(f(x), 0.0, 1e-12) << x;
  double prev = 0.0;
  for (double x = 0.5; x <= 1.0; x += 0.01) {
    EXPECT_GE(f(x), prev - 1e-12);
    prev = f(x);
  }
  // The falling edge mirrors the rising edge.
  EXPECT_NEAR(f(0.7), f(2.3), 1e-9);
  const SampledFunction s = f.sample();
  EXPECT_TRUE((s.values.array() >= -1e-15).all() && (s.values.array() <= 1.0 + 1e-12).all());
}

TEST(Filter, ValidationRejectsBadEdges) {
  EXPECT_THROW(Filter(spec(1.0, 0.5, 2.0, 0.5)), InvalidArgument);
  EXPECT_THROW(Filter(spec(0.5, 1.0, 0.8, 0.5)), InvalidArgument);
  EXPECT_THROW(Filter(spec(0.5, 1.0, 2.0, 1.0)), InvalidArgument);
}

TEST(Fourier, AnalyticFormMatchesQuadrature) {
  const Filter f(spec(0.5, 1.0, 2.0, 0.5));
  const std::vector<double> t = {0.0, 0.1, 1.0, 3.7, 12.0};
  const SampledTransform q = fourier(f.sample(), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_LT(std::abs(f.fourier(t[k]) - q.values(static_cast<Eigen::Index>(k))), 1e-6) << "t = " << t[k];
  }
  // hat f(0) is the mean of f over 2 pi.
  EXPECT_NEAR(f.fourier(0.0).real(), f.sample().integral() / (2.0 * std::numbers::pi), 1e-8);
  EXPECT_NEAR(f.fourier(0.0).imag(), 0.0, 1e-14);
}

TEST(Fourier, InversionRecoversFilter) {
  const Filter f(spec(0.5, 1.0, 2.0, 0.5));
  const SampledTransform fhat = f.fourier(uniform_grid(80.0, 0.02));
  for (double x : {0.2, 0.7, 1.5, 2.3, 2.8}) {
    EXPECT_NEAR(std::real(inverse_fourier(fhat, x)), f(x), 2e-3) << "x = " << x;
    EXPECT_NEAR(std::imag(inverse_fourier(fhat, x)), 0.0, 2e-3);
  }
  EXPECT_GE(f.fourier_l1(), 1.0 - 1e-6);
  EXPECT_GT(f.effective_time(), 0.0);
}

TEST(Fourier, UniformGridIsSymmetric) {
  const auto g = uniform_grid(2.0, 0.5);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front(), -2.0);
  EXPECT_DOUBLE_EQ(g[4], 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 2.0);
}

TEST(Insertion, WindowShiftIsExactAndNotVacuous) {
  const SpectralData sd = small_chain(6);
  std::mt19937_64 rng(61);
  const Filter f(spec(0.6, 1.0, 1.6, 0.5));
  const auto fn = [&f](double x) { return f(x); };
  const EnergyWindow k = EnergyWindow::closed(0.5, 1.5);
  const EnergyWindow kf = kf_window(k, f.spec().support_lo(), f.spec().support_hi());
  EXPECT_DOUBLE_EQ(kf.lo, 2.0 * 0.5 - f.spec().support_hi());
  EXPECT_DOUBLE_EQ(kf.hi, 2.0 * 1.5 - 0.6);
  double claimed_too_small = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Observable x = oracle::random_observable(2, 2, rng);
    const Observable y = oracle::random_observable(2, 2, rng);
    EXPECT_LT(insertion_check(sd, x, y, fn, f.spec().support_lo(), f.spec().support_hi(), k), 1e-12);
    // Pretending the support is a single point drops real contributions.
    claimed_too_small += insertion_check(sd, x, y, fn, 1.3, 1.3, k);
  }
  EXPECT_GT(claimed_too_small, 1e-6);
}

TEST(Hastings, ExactWhenEitherObservableIsIdentity) {
  const SpectralData sd = small_chain(7);
  std::mt19937_64 rng(67);
  const Filter f(spec(0.5, 1.0, 2.0, 0.5));
  const Observable one(2, {0, 0}, Eigen::MatrixXcd::Identity(2, 2));
  const Observable x = oracle::random_observable(2, 2, rng);
  EXPECT_LT(hastings_residual(sd, one, x, f).residual, 1e-10);
  EXPECT_LT(hastings_residual(sd, x, one, f).residual, 1e-10);
}

TEST(Hastings, QuadratureAgreesWithEigenbasisEvaluation) {
  const SpectralData sd = small_chain(8);
  std::mt19937_64 rng(71);
  const Filter f(spec(0.5, 1.0, 2.0, 0.5));
  const Observable x = oracle::random_observable(2, 2, rng);
  const Observable y = oracle::random_observable(2, 2, rng);
  const HastingsResult exact = hastings_residual(sd, x, y, f);
  const HastingsResult quad = hastings_residual(sd, x, y, f, uniform_grid(80.0, 0.02));
  EXPECT_LT(quad.quadrature_error, 5e-3);
  EXPECT_NEAR(quad.residual, exact.residual, 5e-2);
}
