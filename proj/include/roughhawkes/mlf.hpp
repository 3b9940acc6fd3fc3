#pragma once

// Mittag-Leffler functions E_{kappa,beta}(x) = sum_k x^k / Gamma(kappa k + beta)
// on the bounded domain |x| <= kMlArgumentLimit, and the limit-kernel objects
//     f(x) = lambda x^(alpha-1) E_{alpha,alpha}(lambda x^alpha),
//     F(x) = (1 / (lambda delta)) int_0^x f = (E_{alpha,1}(lambda x^alpha) - 1) / (lambda delta).
//
// The series is summed in long double with compensated summation. The
// truncation bound uses that Gamma(y) / Gamma(y + kappa) is decreasing in y,
// so once the term ratio r_k drops below one the remainder after term k is
// at most |t_{k+1}| / (1 - r_k).

namespace roughhawkes {

inline constexpr double kMlArgumentLimit = 50.0;
inline constexpr double kMlTargetRelError = 1e-10;

struct MLParams {
  double kappa = 1.0;
  double beta = 1.0;
};

struct SeriesEvaluation {
  double value = 0.0;
  double truncation_bound = 0.0;
  double rounding_bound = 0.0;
  int terms = 0;

  double relative_bound() const;
};

/// Tail of the series, sum_{k >= first_term} x^k / Gamma(kappa k + beta),
/// with bounds. Dropping leading terms avoids cancellation in E - 1.
SeriesEvaluation ml_series(const MLParams& p, double x, int first_term = 0);

/// E_{kappa,beta}(x). Throws PrecisionLoss when the combined bound exceeds
/// kMlTargetRelError relative, DomainError outside |x| <= kMlArgumentLimit.
double ml_eval(const MLParams& p, double x);

struct LimitKernel {
  double alpha = 0.75;
  double lambda = 0.5;
  double delta = 1.0;

  void validate() const;
};

/// f^{alpha,lambda}(x) for x > 0; exactly 0 when lambda == 0.
double limit_kernel_f(const LimitKernel& lk, double x);

/// int_0^x f = E_{alpha,1}(lambda x^alpha) - 1 (unnormalized cumulative).
double limit_kernel_antiderivative(const LimitKernel& lk, double x);

/// F^{alpha,lambda}(x), the cumulative of f / (lambda delta).
double limit_kernel_F(const LimitKernel& lk, double x);

/// int_0^t F(s) ds = t (E_{alpha,2}(lambda t^alpha) - 1) / (lambda delta).
double limit_kernel_F_integral(const LimitKernel& lk, double t);

/// int_0^inf exp(-z t) f(t) dt by quadrature in u = t^alpha.
double laplace_f_quadrature(const LimitKernel& lk, double z);

/// |quadrature of the Laplace transform - lambda / (z^alpha - lambda)|.
/// Requires z^alpha > lambda.
double laplace_check_f(const LimitKernel& lk, double z);

}  // namespace roughhawkes
