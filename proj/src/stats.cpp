#include "roughhawkes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughhawkes/errors.hpp"

namespace roughhawkes {

Estimate mean_estimate(std::span<const double> xs) {
  Estimate e;
  e.count = xs.size();
  if (xs.empty()) throw DomainError("mean_estimate: empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Small-argument form: P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k <= 8; ++k) cdf += std::exp(c * (2 * k - 1) * (2 * k - 1));
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf;
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: both samples must be nonempty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Step through the merged sample, consuming ties from both sides at once.
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  r.n_a = x.size();
  r.n_b = y.size();
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

std::vector<MomentRow> moment_table(const std::vector<std::vector<double>>& paths,
                                    std::span<const double> grid) {
  if (paths.empty()) throw DomainError("moment_table: empty ensemble");
  const std::size_t N = paths.size();
  std::vector<MomentRow> rows(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double sum = 0.0;
    for (const auto& p : paths) {
      if (p.size() != grid.size()) throw DomainError("moment_table: path length differs from grid");
      sum += p[k];
    }
    const double mean = sum / static_cast<double>(N);
    double m2 = 0.0, m4 = 0.0;
    for (const auto& p : paths) {
      const double d = p[k] - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    auto& r = rows[k];
    r.t = grid[k];
    r.count = N;
    r.mean = mean;
    if (N > 1) {
      const double n = static_cast<double>(N);
      r.variance = m2 / (n - 1.0);
      r.mean_se = std::sqrt(r.variance / n);
      const double mu2 = m2 / n, mu4 = m4 / n;
      r.variance_se = std::sqrt(std::max(0.0, (mu4 - mu2 * mu2 * (n - 3.0) / (n - 1.0)) / n));
    }
  }
  return rows;
}

RoughnessResult roughness_estimate(std::span<const double> values, std::span<const double> grid) {
  if (values.size() != grid.size()) throw DomainError("roughness_estimate: size mismatch");
  if (values.size() < kMinRoughnessPoints) throw DomainError("roughness_estimate: need at least 256 points");
  const std::size_t N = values.size();
  const double step = (grid.back() - grid.front()) / static_cast<double>(N - 1);
  if (!(step > 0.0)) throw DomainError("roughness_estimate: grid must increase");
  for (std::size_t k = 1; k < N; ++k) {
    if (std::abs(grid[k] - grid[k - 1] - step) > 1e-9 * step) {
      throw DomainError("roughness_estimate: grid must be uniform");
    }
  }
  RoughnessResult r;
  std::vector<double> lx, ly;
  for (std::size_t lag = 1; lag <= (N - 1) / 8; lag *= 2) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < N; ++i) {
      const double d = values[i + lag] - values[i];
      s += d * d;
    }
    s /= static_cast<double>(N - lag);
    r.lags.push_back(static_cast<double>(lag) * step);
    r.mean_sq.push_back(s);
    if (s > 0.0) {
      lx.push_back(std::log(r.lags.back()));
      ly.push_back(std::log(s));
    }
  }
  if (lx.size() < 2) throw DomainError("roughness_estimate: path has no variation");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  r.exponent = 0.5 * sxy / sxx;
  return r;
}

bool strictly_decreasing(std::span<const double> xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] < xs[i - 1])) return false;
  }
  return true;
}

}  // namespace roughhawkes
