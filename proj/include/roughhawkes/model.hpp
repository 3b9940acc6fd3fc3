#pragma once

// Excitation kernels and the near-unstable scaling scheme.
//
// The default kernel is the shifted Pareto density
//     phi(t) = alpha c^alpha / (c + t)^(1 + alpha),    c = 1 by default,
// which has unit mass, survival (c / (c + t))^alpha, tail constant
// K = alpha c^alpha and delta = K Gamma(1 - alpha) / alpha = c^alpha Gamma(1 - alpha).

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace roughhawkes {

enum class KernelFamily {
  ShiftedPareto,
  Exponential,  // light-tailed; test fixture only, rejected by make_scheme
};

std::string_view to_string(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::ShiftedPareto;
  double alpha = 0.75;  // tail index (ShiftedPareto)
  double scale = 1.0;   // shift c (ShiftedPareto) or rate (Exponential)

  static KernelSpec shifted_pareto(double alpha, double scale = 1.0);
  static KernelSpec exponential(double rate);

  /// Throws DomainError unless the parameters define a valid density.
  void validate() const;

  bool heavy_tailed() const { return family == KernelFamily::ShiftedPareto; }

  /// lim alpha x^alpha (1 - F(x)); zero for light tails.
  double tail_constant() const;

  /// delta = K Gamma(1 - alpha) / alpha.
  double delta() const;
};

double kernel_eval(const KernelSpec& spec, double t);
double kernel_cdf(const KernelSpec& spec, double x);
/// 1 - F(x), computed without cancellation.
double kernel_survival(const KernelSpec& spec, double x);
double kernel_quantile(const KernelSpec& spec, double u);

struct LaplaceValue {
  double value;
  double error;      // quadrature error estimate
  double tail_bound; // analytic bound on the truncated tail
  double cutoff;     // truncation point T_cut
};

/// Laplace transform of phi at z >= 0 by panel quadrature on [0, T_cut] with
/// T_cut chosen so that exp(-z T_cut) (1 - F(T_cut)) < 1e-14.
LaplaceValue kernel_laplace_detail(const KernelSpec& spec, double z);
double kernel_laplace(const KernelSpec& spec, double z);

struct MalthusSolution {
  double b = 0.0;
  double residual = 0.0;  // |Lphi(b) - a^-2|
  int bisection_steps = 0;
  int newton_steps = 0;
};

/// Solves Lphi(b) = 1 / a_n^2 for the unique b > 0 (requires a_n > 1).
MalthusSolution malthus_solve_detail(const KernelSpec& spec, double a_n);
double malthus_solve(const KernelSpec& spec, double a_n);

/// The n-indexed regime with the limits of the scaling assumptions realized
/// as equalities: a_n = 1 + lambda delta n^-alpha, mu_n = mu* delta n^(alpha-1).
struct ScalingScheme {
  KernelSpec kernel;
  std::int64_t n = 1;
  double lambda = 0.0;
  double mu_star = 0.0;
  double delta = 0.0;
  double a_n = 1.0;
  double mu_n = 0.0;
  double b_n = 0.0;
  double malthus_residual = 0.0;
  /// When false the process is a homogeneous Poisson process with rate mu_n
  /// (test mode used to check the simulators and the harness statistics).
  bool excitation = true;

  double alpha() const { return kernel.alpha; }
  /// Mass of the excitation kernel a_n phi actually used by the simulators.
  double branching() const { return excitation ? a_n : 0.0; }
  /// n^(2 alpha): normalization of counts in the rescaled process.
  double count_scale() const;

  ScalingScheme without_excitation() const;
};

ScalingScheme make_scheme(const KernelSpec& kernel, double lambda, double mu_star,
                          std::int64_t n);
ScalingScheme make_scheme(double alpha, double lambda, double mu_star,
                          std::int64_t n);

/// The limit of n b_n, (2 lambda)^(1/alpha).
double malthus_limit(double alpha, double lambda);

/// Upper bound on E[Z_n^n] / n^(2 alpha):
/// mu_n n e^(n b_n) a_n / ((a_n - 1) n^(2 alpha)).
double expected_count_bound(const ScalingScheme& scheme);

/// Receives warnings (e.g. alpha outside (1/2, 1)). Defaults to stderr.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace roughhawkes
