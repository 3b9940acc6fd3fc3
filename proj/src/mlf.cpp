#include "roughhawkes/mlf.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

#include <quadmath.h>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/quadrature.hpp"

namespace roughhawkes {

namespace {

constexpr int kMaxTerms = 200000;

void check_params(const MLParams& p) {
  if (!(p.kappa > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.kappa) || !std::isfinite(p.beta)) {
    throw DomainError("Mittag-Leffler indices must be positive and finite");
  }
}

void check_argument(double x) {
  if (!std::isfinite(x) || std::abs(x) > kMlArgumentLimit) {
    std::ostringstream os;
    os << "Mittag-Leffler argument " << x << " outside |x| <= " << kMlArgumentLimit;
    throw DomainError(os.str());
  }
}

double checked(const SeriesEvaluation& s, const char* what) {
  const double rel = s.relative_bound();
  if (rel > kMlTargetRelError) {
    std::ostringstream os;
    os << what << ": series error bound " << rel << " exceeds " << kMlTargetRelError;
    throw PrecisionLoss(os.str(), rel);
  }
  return s.value;
}

}  // namespace

double SeriesEvaluation::relative_bound() const {
  const double total = truncation_bound + rounding_bound;
  if (total == 0.0) return 0.0;
  if (value == 0.0) return std::numeric_limits<double>::infinity();
  return total / std::abs(value);
}

namespace {

// Math shims so the series kernel can run in long double or binary128.
inline long double m_exp(long double v) { return std::exp(v); }
inline long double m_log(long double v) { return std::log(v); }
inline long double m_lgamma(long double v) { return std::lgamma(v); }
inline long double m_abs(long double v) { return std::abs(v); }
inline __float128 m_exp(__float128 v) { return expq(v); }
inline __float128 m_log(__float128 v) { return logq(v); }
inline __float128 m_lgamma(__float128 v) { return lgammaq(v); }
inline __float128 m_abs(__float128 v) { return fabsq(v); }

template <class T>
T epsilon_of() {
  if constexpr (std::is_same_v<T, __float128>) {
    return static_cast<__float128>(0x1p-112);  // FLT128_EPSILON needs GNU literals
  } else {
    return std::numeric_limits<T>::epsilon();
  }
}

template <class T>
SeriesEvaluation sum_series(const MLParams& p, double x, int first_term) {
  const T kappa = p.kappa;
  const T beta = p.beta;
  const T log_abs_x = m_log(static_cast<T>(std::abs(x)));
  const T eps = epsilon_of<T>();
  const T stop = eps * static_cast<T>(1e-2);

  T sum = 0, comp = 0, rounding = 0, truncation = 0;
  T lg_next = m_lgamma(kappa * first_term + beta);
  int k = first_term;
  bool done = false;
  for (; k < first_term + kMaxTerms; ++k) {
    const T lg = lg_next;
    lg_next = m_lgamma(kappa * (k + 1) + beta);
    const T kl = static_cast<T>(k) * log_abs_x;
    T term = m_exp(kl - lg);
    if (x < 0.0 && (k % 2) == 1) term = -term;

    // Kahan-Babuska summation.
    const T t = sum + term;
    comp += m_abs(sum) >= m_abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    // Relative error of a term is dominated by the absolute error of its
    // logarithm k log|x| - lgamma(.).
    rounding += m_abs(term) * (8 + m_abs(kl) + m_abs(lg));

    const T ratio = m_exp(log_abs_x + lg - lg_next);
    if (ratio < 1) {
      const T remainder = m_abs(term) * ratio / (1 - ratio);
      if (remainder <= stop * m_abs(sum + comp) || remainder == 0) {
        truncation = remainder;
        ++k;
        done = true;
        break;
      }
    }
  }
  if (!done) {
    throw PrecisionLoss("ml_series: truncation bound not reached within term budget",
                        std::numeric_limits<double>::infinity());
  }
  SeriesEvaluation out;
  out.value = static_cast<double>(sum + comp);
  out.truncation_bound = static_cast<double>(truncation);
  out.rounding_bound = static_cast<double>(rounding * eps);
  out.terms = k - first_term;
  return out;
}

}  // namespace

SeriesEvaluation ml_series(const MLParams& p, double x, int first_term) {
  check_params(p);
  check_argument(x);
  if (first_term < 0) throw DomainError("ml_series: first_term must be >= 0");

  if (x == 0.0) {
    SeriesEvaluation out;
    out.value = first_term == 0 ? 1.0 / std::tgamma(p.beta) : 0.0;
    out.terms = first_term == 0 ? 1 : 0;
    return out;
  }
  // Alternating sums cancel; fall back to binary128 when the long double
  // bound is not comfortably inside the target.
  auto s = sum_series<long double>(p, x, first_term);
  if (s.relative_bound() > 1e-2 * kMlTargetRelError) {
    s = sum_series<__float128>(p, x, first_term);
  }
  return s;
}

double ml_eval(const MLParams& p, double x) {
  return checked(ml_series(p, x, 0), "ml_eval");
}

void LimitKernel::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("limit kernel: alpha must lie in (0, 1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("limit kernel: lambda must be >= 0");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("limit kernel: delta must be > 0");
}

double limit_kernel_f(const LimitKernel& lk, double x) {
  lk.validate();
  if (!(x > 0.0)) throw DomainError("limit_kernel_f: x must be > 0");
  if (lk.lambda == 0.0) return 0.0;
  const double y = lk.lambda * std::pow(x, lk.alpha);
  const double e = checked(ml_series({lk.alpha, lk.alpha}, y, 0), "limit_kernel_f");
  return lk.lambda * std::pow(x, lk.alpha - 1.0) * e;
}

double limit_kernel_antiderivative(const LimitKernel& lk, double x) {
  lk.validate();
  if (!(x >= 0.0)) throw DomainError("limit_kernel_antiderivative: x must be >= 0");
  if (x == 0.0 || lk.lambda == 0.0) return 0.0;
  const double y = lk.lambda * std::pow(x, lk.alpha);
  return checked(ml_series({lk.alpha, 1.0}, y, 1), "limit_kernel_antiderivative");
}

double limit_kernel_F(const LimitKernel& lk, double x) {
  lk.validate();
  if (!(x >= 0.0)) throw DomainError("limit_kernel_F: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (lk.lambda == 0.0) return std::pow(x, lk.alpha) / (lk.delta * std::tgamma(1.0 + lk.alpha));
  return limit_kernel_antiderivative(lk, x) / (lk.lambda * lk.delta);
}

double limit_kernel_F_integral(const LimitKernel& lk, double t) {
  lk.validate();
  if (!(t >= 0.0)) throw DomainError("limit_kernel_F_integral: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (lk.lambda == 0.0) {
    return std::pow(t, lk.alpha + 1.0) / (lk.delta * std::tgamma(2.0 + lk.alpha));
  }
  const double y = lk.lambda * std::pow(t, lk.alpha);
  const double e = checked(ml_series({lk.alpha, 2.0}, y, 1), "limit_kernel_F_integral");
  return t * e / (lk.lambda * lk.delta);
}

double laplace_f_quadrature(const LimitKernel& lk, double z) {
  lk.validate();
  if (lk.lambda == 0.0) return 0.0;
  const double abscissa = std::pow(lk.lambda, 1.0 / lk.alpha);
  if (!(z > abscissa)) {
    std::ostringstream os;
    os << "laplace transform of f diverges: z^alpha=" << std::pow(z, lk.alpha)
       << " <= lambda=" << lk.lambda;
    throw DomainError(os.str());
  }
  // Beyond t the integrand behaves like (c / alpha) exp(-(z - c) t), c = lambda^(1/alpha).
  const double gap = z - abscissa;
  const double prefactor = 10.0 * abscissa / (lk.alpha * gap);
  const double t_cut = std::max(1.0, std::log(prefactor / 1e-13) / gap);
  const double t_domain = std::pow(kMlArgumentLimit / lk.lambda, 1.0 / lk.alpha);
  if (t_cut > t_domain) {
    throw DomainError("laplace_f_quadrature: z too close to the convergence abscissa");
  }
  const double u_cut = std::pow(t_cut, lk.alpha);
  // With u = t^alpha, f(t) dt = (lambda / alpha) E_{alpha,alpha}(lambda u) du.
  const MLParams p{lk.alpha, lk.alpha};
  auto g = [&](double u) {
    return lk.lambda / lk.alpha * std::exp(-z * std::pow(u, 1.0 / lk.alpha)) *
           ml_series(p, lk.lambda * u, 0).value;
  };
  quad::Options opt;
  opt.abs_tol = 1e-11;
  opt.rel_tol = 1e-12;
  const auto breaks = quad::geometric_breaks(0.0, u_cut, u_cut / 1024.0);
  const auto r = quad::integrate(g, breaks, opt);
  if (!r.converged) {
    throw ConvergenceError("laplace_f_quadrature: quadrature did not converge", r.error);
  }
  return r.value;
}

double laplace_check_f(const LimitKernel& lk, double z) {
  lk.validate();
  if (!(z >= 0.0) || !(std::pow(z, lk.alpha) > lk.lambda)) {
    throw DomainError("laplace_check_f: requires z^alpha > lambda");
  }
  const double exact = lk.lambda / (std::pow(z, lk.alpha) - lk.lambda);
  return std::abs(laplace_f_quadrature(lk, z) - exact);
}

}  // namespace roughhawkes
