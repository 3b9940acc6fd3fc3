#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/model.hpp"
#include "roughhawkes/rng.hpp"

using namespace roughhawkes;

namespace {
// 1 - Lphi(z) = z^alpha e^z Gamma(1 - alpha, z) for the unit shifted Pareto kernel.
double laplace_closed_form(double alpha, double z) {
  return 1.0 - std::pow(z, alpha) * std::exp(z) * boost::math::tgamma(1.0 - alpha, z);
}
}  // namespace

TEST(Kernel, DefaultValues) {
  const auto k = KernelSpec::shifted_pareto(0.75);
  EXPECT_DOUBLE_EQ(kernel_eval(k, 0.0), 0.75);
  EXPECT_DOUBLE_EQ(k.tail_constant(), 0.75);
  EXPECT_NEAR(k.delta(), std::tgamma(0.25), 1e-14);
  EXPECT_NEAR(kernel_eval(k, 3.0), 0.75 * std::pow(4.0, -1.75), 1e-16);
}

TEST(Kernel, CdfSurvivalQuantileAreConsistent) {
  for (const auto& k : {KernelSpec::shifted_pareto(0.6, 2.0), KernelSpec::exponential(1.7)}) {
    for (double x : {0.0, 1e-9, 0.3, 5.0, 1e6}) {
      EXPECT_NEAR(kernel_cdf(k, x) + kernel_survival(k, x), 1.0, 1e-15);
    }
    for (double u : {1e-12, 0.1, 0.5, 0.9, 1 - 1e-9}) {
      EXPECT_NEAR(kernel_cdf(k, kernel_quantile(k, u)), u, 1e-12 * std::max(1.0, u / (1 - u)));
    }
  }
}

TEST(Kernel, RejectsInvalidInput) {
  EXPECT_THROW(KernelSpec::shifted_pareto(1.2).validate(), DomainError);
  EXPECT_THROW(KernelSpec::shifted_pareto(0.5, -1.0).validate(), DomainError);
  const auto k = KernelSpec::shifted_pareto(0.75);
  EXPECT_THROW(kernel_eval(k, -1.0), DomainError);
  EXPECT_THROW(kernel_quantile(k, 1.0), DomainError);
  EXPECT_THROW(kernel_laplace(k, -0.1), DomainError);
}

TEST(Kernel, QuantileSamplerMatchesCdf) {
  // One-sample KS statistic of 1e6 inverse-CDF draws against the exact CDF.
  const auto k = KernelSpec::shifted_pareto(0.75);
  Rng rng(2024);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = kernel_quantile(k, rng.uniform());
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = kernel_cdf(k, xs[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  EXPECT_LT(d, 0.002);
}

TEST(Laplace, AgreesWithIncompleteGammaClosedForm) {
  for (double alpha : {0.55, 0.75, 0.9}) {
    const auto k = KernelSpec::shifted_pareto(alpha);
    for (double z : {1e-4, 1e-2, 0.3, 1.0, 7.0}) {
      EXPECT_NEAR(kernel_laplace(k, z), laplace_closed_form(alpha, z), 1e-12)
          << "alpha=" << alpha << " z=" << z;
    }
  }
}

TEST(Laplace, AgreesWithIndependentQuadrature) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const auto k = KernelSpec::shifted_pareto(0.75, 1.5);
  for (double z : {0.05, 0.5, 4.0}) {
    const double ref =
        integrator.integrate([&](double t) { return std::exp(-z * t) * kernel_eval(k, t); });
    EXPECT_NEAR(kernel_laplace(k, z), ref, 1e-12);
  }
  const auto e = KernelSpec::exponential(2.0);
  EXPECT_NEAR(kernel_laplace(e, 3.0), 2.0 / 5.0, 1e-13);
}

TEST(Laplace, EdgeCases) {
  const auto k = KernelSpec::shifted_pareto(0.75);
  EXPECT_EQ(kernel_laplace(k, 0.0), 1.0);
  EXPECT_NEAR(kernel_laplace(k, 1e-6), laplace_closed_form(0.75, 1e-6), 1e-13);
  // Monotone decreasing in z.
  double prev = 1.0;
  for (double z = 1e-3; z < 100; z *= 3) {
    const double v = kernel_laplace(k, z);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Laplace, ExpansionRatioFrozenValues) {
  // (1 - Lphi(z)) / z^alpha at alpha = 0.75, from a 40-digit evaluation of the
  // incomplete-gamma closed form.
  const auto k = KernelSpec::shifted_pareto(0.75);
  const std::pair<double, double> ref[] = {{1e-3, 2.917356265124036},
                                           {1e-4, 3.225940485919118},
                                           {1e-5, 3.400707834925894},
                                           {1e-6, 3.499122326233964}};
  for (const auto& [z, r] : ref) {
    EXPECT_NEAR((1.0 - kernel_laplace(k, z)) / std::pow(z, 0.75), r, 1e-6 * r);
  }
}

TEST(Malthus, FrozenRoot) {
  const auto k = KernelSpec::shifted_pareto(0.75);
  const auto sol = malthus_solve_detail(k, 1.1);
  EXPECT_NEAR(sol.b, 0.040520861122124202584, 1e-13);
  EXPECT_LT(sol.residual, 1e-12);
  EXPECT_NEAR(kernel_laplace(k, sol.b), 1.0 / (1.1 * 1.1), 1e-12);
}

TEST(Malthus, RootIsDecreasingInA) {
  const auto k = KernelSpec::shifted_pareto(0.75);
  double prev = 0.0;
  for (double a : {1.5, 1.2, 1.05, 1.01, 1.001}) {
    const double b = malthus_solve(k, a);
    if (prev > 0.0) EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(malthus_solve(k, 1.0), DomainError);
  EXPECT_THROW(malthus_solve(k, 0.9), DomainError);
}

TEST(Scheme, FrozenScalingValues) {
  const auto s = make_scheme(0.75, 0.5, 1.0, 100);
  EXPECT_NEAR(s.a_n, 1.0573259260862763, 1e-15);
  EXPECT_NEAR(s.b_n, 0.017217537730228, 1e-13);
  EXPECT_NEAR(s.mu_n, std::tgamma(0.25) * std::pow(100.0, -0.25), 1e-14);
  EXPECT_LT(s.malthus_residual, 1e-12);
  EXPECT_NEAR(malthus_limit(0.75, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(s.count_scale(), std::pow(100.0, 1.5), 1e-9);
}

TEST(Scheme, NbnApproachesLimit) {
  double prev = 1e9;
  for (std::int64_t n : {100, 1000, 10000, 100000}) {
    const auto s = make_scheme(0.75, 0.5, 1.0, n);
    const double err = std::abs(n * s.b_n - 1.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Scheme, WarnsOutsideRegimeAndRejectsLightTails) {
  std::vector<std::string> seen;
  set_warning_handler([&](std::string_view m) { seen.emplace_back(m); });
  (void)make_scheme(0.4, 0.5, 1.0, 100);
  set_warning_handler(nullptr);
  EXPECT_EQ(seen.size(), 1u);
  EXPECT_THROW(make_scheme(KernelSpec::exponential(1.0), 0.5, 1.0, 10), DomainError);
  EXPECT_THROW(make_scheme(0.75, -0.5, 1.0, 10), DomainError);
  EXPECT_THROW(make_scheme(0.75, 0.5, 1.0, 0), DomainError);
}

TEST(Scheme, PoissonModeHasNoExcitation) {
  const auto s = make_scheme(0.75, 0.5, 1.0, 100).without_excitation();
  EXPECT_EQ(s.branching(), 0.0);
  EXPECT_GT(s.mu_n, 0.0);
}
