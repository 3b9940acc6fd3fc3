#include "roughhawkes/limit.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/mlf.hpp"

namespace roughhawkes {

namespace {

LimitKernel kernel_of(const LimitParams& p) { return {p.alpha, p.lambda, p.effective_delta()}; }

std::size_t step_count(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("limit scheme: h must lie in (0, 1]");
  const double m = std::round(1.0 / h);
  if (std::abs(m * h - 1.0) > 1e-12) throw DomainError("limit scheme: 1/h must be an integer");
  return static_cast<std::size_t>(m);
}

}  // namespace

LimitParams LimitParams::from_scheme(const ScalingScheme& s) {
  return {s.alpha(), s.lambda, s.mu_star, s.delta};
}

double LimitParams::effective_delta() const {
  return delta > 0.0 ? delta : std::tgamma(1.0 - alpha);
}

void LimitParams::validate() const {
  kernel_of(*this).validate();
  if (!(mu_star >= 0.0) || !std::isfinite(mu_star)) throw DomainError("limit: mu* must be >= 0");
  if (delta < 0.0) throw DomainError("limit: delta must be >= 0");
}

LimitScheme make_limit_scheme(const LimitParams& params, double h) {
  params.validate();
  LimitScheme s;
  s.params = params;
  s.steps = step_count(h);
  s.h = 1.0 / static_cast<double>(s.steps);
  const auto lk = kernel_of(params);
  const double scale = params.mu_star * params.effective_delta();

  std::vector<double> F(s.steps + 1);
  for (std::size_t k = 0; k <= s.steps; ++k) {
    F[k] = limit_kernel_F(lk, static_cast<double>(k) * s.h);
  }
  s.skeleton.resize(s.steps + 1);
  for (std::size_t k = 0; k <= s.steps; ++k) s.skeleton[k] = scale * F[k];
  s.weights.resize(s.steps);
  for (std::size_t m = 1; m <= s.steps; ++m) s.weights[m - 1] = (F[m] - F[m - 1]) / s.h;
  return s;
}

LimitPath simulate_Y(const LimitScheme& scheme, std::span<const double> noise) {
  const std::size_t M = scheme.steps;
  if (noise.size() != M) throw DomainError("simulate_Y: need one noise increment per step");
  LimitPath p;
  p.h = scheme.h;
  p.params = scheme.params;
  p.noise.assign(noise.begin(), noise.end());
  p.t.resize(M + 1);
  p.Y.assign(M + 1, 0.0);
  for (std::size_t k = 0; k <= M; ++k) p.t[k] = static_cast<double>(k) * scheme.h;

  // g_j = sqrt(Y_j) dB_j; Y_k = skeleton_k + sum_{j<k} W_{k-j} g_j.
  std::vector<double> g(M, 0.0);
  const double* W = scheme.weights.data();
  std::size_t clipped = 0;
  for (std::size_t k = 0; k <= M; ++k) {
    double y = scheme.skeleton[k];
    for (std::size_t j = 0; j < k; ++j) y += W[k - j - 1] * g[j];
    if (y < 0.0) {
      ++clipped;
      y = 0.0;
    }
    p.Y[k] = y;
    if (k < M) g[k] = std::sqrt(y) * noise[k];
  }
  p.clip_fraction = static_cast<double>(clipped) / static_cast<double>(M);
  return p;
}

LimitPath simulate_Y(const LimitScheme& scheme, SeedRecord seed) {
  Rng rng(seed.stream);
  std::vector<double> noise(scheme.steps);
  rng.fill_normal(noise);
  const double sd = std::sqrt(scheme.h);
  for (double& z : noise) z *= sd;
  return simulate_Y(scheme, std::span<const double>(noise));
}

LimitPath simulate_Y(const LimitParams& params, double h, SeedRecord seed) {
  return simulate_Y(make_limit_scheme(params, h), seed);
}

LimitPath& simulate_X(LimitPath& path) {
  path.X.assign(path.Y.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < path.Y.size(); ++k) {
    acc += path.Y[k - 1];
    path.X[k] = path.h * acc;
  }
  return path;
}

double deterministic_mean_X(const LimitParams& params, double t) {
  params.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("deterministic_mean_X: t must lie in [0, 1]");
  return params.mu_star * params.effective_delta() * limit_kernel_F_integral(kernel_of(params), t);
}

std::vector<double> coarsen_noise(std::span<const double> fine) {
  if (fine.size() % 2 != 0) throw DomainError("coarsen_noise: odd number of increments");
  std::vector<double> out(fine.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fine[2 * i] + fine[2 * i + 1];
  return out;
}

void write_limit_csv(std::ostream& os, const LimitPath& p) {
  os << "t,Y,X\n" << std::setprecision(17);
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    os << p.t[k] << ',' << p.Y[k] << ',' << (p.X.empty() ? 0.0 : p.X[k]) << '\n';
  }
}

}  // namespace roughhawkes
