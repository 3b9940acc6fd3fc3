#pragma once

// Monte Carlo summaries used by the convergence gates.

#include <cstddef>
#include <span>
#include <vector>

namespace roughhawkes {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  std::size_t count = 0;
};

/// Sample mean with standard error sqrt(s^2 / N) (s^2 unbiased).
Estimate mean_estimate(std::span<const double> xs);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0, n_b = 0;
};

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

struct MomentRow {
  double t = 0.0;
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;     // unbiased
  double variance_se = 0.0;  // from the fourth central moment
  std::size_t count = 0;
};

/// Column-wise moments of an ensemble; paths[i][k] is path i at grid[k].
std::vector<MomentRow> moment_table(const std::vector<std::vector<double>>& paths,
                                    std::span<const double> grid);

inline constexpr std::size_t kMinRoughnessPoints = 256;

struct RoughnessResult {
  double exponent = 0.0;
  std::vector<double> lags;     // in time units
  std::vector<double> mean_sq;  // mean squared increment per lag
};

/// Slope / 2 of log mean squared increments against log lag over dyadic
/// lags 1, 2, 4, ... up to an eighth of the path. Needs >= 256 points on a
/// uniform grid.
RoughnessResult roughness_estimate(std::span<const double> values, std::span<const double> grid);

/// true when every step strictly decreases.
bool strictly_decreasing(std::span<const double> xs);

}  // namespace roughhawkes
