#pragma once

// The limiting processes: the fractional CIR Volterra equation
//     Y_t = mu* delta F(t) + (1 / (lambda delta)) int_0^t f(t - s) sqrt(Y_s) dB_s
// with f = f^{alpha,lambda}, F its normalized cumulative, and X_t = int_0^t Y.
//
// Discretization: on t_k = k h, the stochastic integral over [t_j, t_{j+1})
// uses the cell average of the kernel,
//     W_m = (F(m h) - F((m - 1) h)) / h,    m = k - j,
// taken from the closed-form cumulative, so the t^(alpha-1) singularity is
// integrated exactly on the diagonal cell. sqrt(Y) is evaluated at the left
// point, and Y is clipped at 0 after each step.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughhawkes/hawkes.hpp"

namespace roughhawkes {

struct LimitParams {
  double alpha = 0.75;
  double lambda = 0.5;
  double mu_star = 1.0;
  double delta = 0.0;  // 0 means Gamma(1 - alpha), the default kernel's value

  static LimitParams from_scheme(const ScalingScheme& s);
  double effective_delta() const;
  void validate() const;
};

/// Deterministic part of the scheme for a given step, shared by all paths.
struct LimitScheme {
  LimitParams params;
  double h = 0.0;
  std::size_t steps = 0;          // 1 / h
  std::vector<double> skeleton;   // mu* delta F(t_k), k = 0..steps
  std::vector<double> weights;    // W_m, m = 1..steps (index m - 1)
};

LimitScheme make_limit_scheme(const LimitParams& params, double h);

struct LimitPath {
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> Y;
  std::vector<double> X;      // empty until simulate_X
  std::vector<double> noise;  // Brownian increments, variance h
  LimitParams params;
  double clip_fraction = 0.0; // share of steps whose pre-clip value was negative
};

/// Draws the noise from the substream of `seed`.
LimitPath simulate_Y(const LimitScheme& scheme, SeedRecord seed);
LimitPath simulate_Y(const LimitParams& params, double h, SeedRecord seed);
/// Uses the given increments (one per step); zeros give the skeleton.
LimitPath simulate_Y(const LimitScheme& scheme, std::span<const double> noise);

/// Fills X(t_k) = h sum_{j<k} Y(t_j).
LimitPath& simulate_X(LimitPath& path);

/// mu* delta int_0^t F(s) ds, from the closed form in E_{alpha,2}.
double deterministic_mean_X(const LimitParams& params, double t);

/// Sums consecutive pairs of increments: the noise of the step-2h scheme
/// coupled to a step-h run.
std::vector<double> coarsen_noise(std::span<const double> fine);

/// CSV with columns t, Y, X.
void write_limit_csv(std::ostream& os, const LimitPath& path);

}  // namespace roughhawkes
