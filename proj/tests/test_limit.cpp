#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/limit.hpp"
#include "roughhawkes/mlf.hpp"
#include "roughhawkes/stats.hpp"

using namespace roughhawkes;

namespace {
const LimitParams kParams{0.75, 0.5, 1.0, 0.0};
}

TEST(Limit, DeltaDefaultsToGamma) {
  EXPECT_NEAR(kParams.effective_delta(), std::tgamma(0.25), 1e-15);
}

TEST(Limit, ZeroBaselineIsAbsorbing) {
  auto p = simulate_Y(LimitParams{0.75, 0.5, 0.0, 0.0}, 1.0 / 256, make_seed(1, 0));
  for (double y : p.Y) EXPECT_EQ(y, 0.0);
  simulate_X(p);
  for (double x : p.X) EXPECT_EQ(x, 0.0);
}

TEST(Limit, ZeroNoiseGivesTheSkeleton) {
  const auto scheme = make_limit_scheme(kParams, 1.0 / 128);
  const std::vector<double> zeros(scheme.steps, 0.0);
  const auto p = simulate_Y(scheme, zeros);
  const LimitKernel lk{0.75, 0.5, kParams.effective_delta()};
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    EXPECT_EQ(p.Y[k], scheme.skeleton[k]);
    EXPECT_NEAR(p.Y[k], kParams.effective_delta() * limit_kernel_F(lk, p.t[k]), 1e-14);
  }
  EXPECT_EQ(p.clip_fraction, 0.0);
}

TEST(Limit, PathInvariants) {
  auto p = simulate_Y(kParams, 1.0 / 512, make_seed(2, 5));
  simulate_X(p);
  ASSERT_EQ(p.t.size(), 513u);
  EXPECT_EQ(p.X[0], 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.Y.size(); ++k) {
    EXPECT_GE(p.Y[k], 0.0);
    if (k > 0) {
      acc += p.Y[k - 1];
      EXPECT_GE(p.X[k], p.X[k - 1]);
      EXPECT_NEAR(p.X[k], p.h * acc, 1e-15 * (1 + acc));
    }
  }
  EXPECT_GE(p.clip_fraction, 0.0);
  EXPECT_LT(p.clip_fraction, 0.05);
}

TEST(Limit, RejectsNonDivisorStep) {
  EXPECT_THROW(make_limit_scheme(kParams, 0.3), DomainError);
  EXPECT_THROW(make_limit_scheme(kParams, 0.0), DomainError);
  const auto scheme = make_limit_scheme(kParams, 0.25);
  EXPECT_THROW(simulate_Y(scheme, std::vector<double>(3, 0.0)), DomainError);
}

TEST(Limit, MeanIdentityRepresentationsAgree) {
  // (mu*/lambda) int_0^t f(t - s) s ds against mu* delta int_0^t F, by two
  // independent quadratures.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const LimitKernel lk{0.75, 0.5, kParams.effective_delta()};
  for (double t : {0.5, 1.0}) {
    const double lhs = kParams.mu_star / lk.lambda *
                       integrator.integrate([&](double s) { return limit_kernel_f(lk, t - s) * s; },
                                            0.0, t);
    const double rhs = kParams.mu_star * lk.delta *
                       integrator.integrate([&](double s) { return limit_kernel_F(lk, s); }, 0.0, t);
    EXPECT_LT(std::abs(lhs - rhs), 1e-8);
    EXPECT_NEAR(deterministic_mean_X(kParams, t), rhs, 1e-10);
  }
  EXPECT_EQ(deterministic_mean_X(kParams, 0.0), 0.0);
  EXPECT_NEAR(deterministic_mean_X(kParams, 1.0), 0.80850227686942019408, 1e-12);
}

TEST(Limit, SkeletonIntegralSelfConverges) {
  // Left-point X(1) of the noiseless scheme approaches the mean under halving.
  const double target = deterministic_mean_X(kParams, 1.0);
  double prev_err = 1e9;
  for (double h : {1.0 / 256, 1.0 / 512, 1.0 / 1024}) {
    const auto scheme = make_limit_scheme(kParams, h);
    auto p = simulate_Y(scheme, std::vector<double>(scheme.steps, 0.0));
    simulate_X(p);
    const double err = std::abs(p.X.back() - target) / target;
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 0.005);
}

TEST(Limit, CoarsenedNoiseSumsPairs) {
  const std::vector<double> fine{1, 2, 3, 4, -1, 0.5};
  EXPECT_EQ(coarsen_noise(fine), (std::vector<double>{3, 7, -0.5}));
  EXPECT_THROW(coarsen_noise(std::vector<double>{1, 2, 3}), DomainError);
}

TEST(Limit, MonteCarloMeanMatchesSkeleton) {
  const auto scheme = make_limit_scheme(kParams, 1.0 / 256);
  std::vector<std::vector<double>> cols(3);
  std::vector<double> x1;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    auto p = simulate_Y(scheme, make_seed(7, i));
    simulate_X(p);
    cols[0].push_back(p.Y[64]);
    cols[1].push_back(p.Y[128]);
    cols[2].push_back(p.Y[256]);
    x1.push_back(p.X.back());
  }
  const std::size_t idx[3] = {64, 128, 256};
  for (int j = 0; j < 3; ++j) {
    const auto e = mean_estimate(cols[j]);
    EXPECT_LE(std::abs(e.mean - scheme.skeleton[idx[j]]), 3 * e.se) << j;
  }
  double skeleton_x1 = 0.0;
  for (std::size_t k = 0; k < scheme.steps; ++k) skeleton_x1 += scheme.h * scheme.skeleton[k];
  const auto e = mean_estimate(x1);
  EXPECT_LE(std::abs(e.mean - skeleton_x1), 3 * e.se);
}

TEST(Limit, CsvExport) {
  auto p = simulate_Y(kParams, 0.25, make_seed(1, 1));
  simulate_X(p);
  std::ostringstream os;
  write_limit_csv(os, p);
  EXPECT_EQ(os.str().substr(0, 6), "t,Y,X\n");
}
