#include "roughhawkes/model.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/quadrature.hpp"

namespace roughhawkes {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler h = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

constexpr double kLaplaceTailTarget = 1e-14;
constexpr double kLaplaceAbsTol = 1e-15;
constexpr double kLaplaceFailTol = 1e-12;

constexpr double kBracketLow = 1e-16;
constexpr double kBracketHigh = 1e3;
constexpr double kBisectionWidth = 1e-14;
constexpr int kMaxNewton = 5;

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::ShiftedPareto: return "shifted-pareto";
    case KernelFamily::Exponential: return "exponential";
  }
  return "unknown";
}

KernelSpec KernelSpec::shifted_pareto(double alpha, double scale) {
  KernelSpec k{KernelFamily::ShiftedPareto, alpha, scale};
  k.validate();
  return k;
}

KernelSpec KernelSpec::exponential(double rate) {
  KernelSpec k{KernelFamily::Exponential, 0.0, rate};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("kernel scale must be positive and finite");
  }
  if (family == KernelFamily::ShiftedPareto && !(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("tail index alpha must lie in (0, 1)");
  }
}

double KernelSpec::tail_constant() const {
  return heavy_tailed() ? alpha * std::pow(scale, alpha) : 0.0;
}

double KernelSpec::delta() const {
  return heavy_tailed() ? tail_constant() * std::tgamma(1.0 - alpha) / alpha : 0.0;
}

double kernel_eval(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("kernel_eval: t must be >= 0");
  switch (spec.family) {
    case KernelFamily::ShiftedPareto:
      return spec.alpha / spec.scale * std::pow(1.0 + t / spec.scale, -1.0 - spec.alpha);
    case KernelFamily::Exponential:
      return spec.scale * std::exp(-spec.scale * t);
  }
  return 0.0;
}

double kernel_survival(const KernelSpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("kernel_cdf: x must be >= 0");
  switch (spec.family) {
    case KernelFamily::ShiftedPareto:
      return std::exp(-spec.alpha * std::log1p(x / spec.scale));
    case KernelFamily::Exponential:
      return std::exp(-spec.scale * x);
  }
  return 0.0;
}

double kernel_cdf(const KernelSpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("kernel_cdf: x must be >= 0");
  switch (spec.family) {
    case KernelFamily::ShiftedPareto:
      return -std::expm1(-spec.alpha * std::log1p(x / spec.scale));
    case KernelFamily::Exponential:
      return -std::expm1(-spec.scale * x);
  }
  return 0.0;
}

double kernel_quantile(const KernelSpec& spec, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("kernel_quantile: u must lie in [0, 1)");
  switch (spec.family) {
    case KernelFamily::ShiftedPareto:
      return spec.scale * std::expm1(-std::log1p(-u) / spec.alpha);
    case KernelFamily::Exponential:
      return -std::log1p(-u) / spec.scale;
  }
  return 0.0;
}

LaplaceValue kernel_laplace_detail(const KernelSpec& spec, double z) {
  spec.validate();
  if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("kernel_laplace: z must be >= 0");
  if (z == 0.0) return {1.0, 0.0, 0.0, 0.0};

  double cutoff = 1.0;
  auto tail = [&](double T) { return std::exp(-z * T) * kernel_survival(spec, T); };
  while (tail(cutoff) >= kLaplaceTailTarget) cutoff *= 2.0;

  const double head = spec.family == KernelFamily::ShiftedPareto ? spec.scale : 1.0 / spec.scale;
  const auto breaks = quad::geometric_breaks(0.0, cutoff, std::min(head, 1.0 / z) / 4.0);
  quad::Options opt;
  opt.abs_tol = kLaplaceAbsTol;
  opt.max_intervals = 8000;
  const auto r = quad::integrate(
      [&](double t) { return std::exp(-z * t) * kernel_eval(spec, t); }, breaks, opt);
  if (r.error > kLaplaceFailTol) {
    std::ostringstream os;
    os << "kernel_laplace: quadrature did not converge at z=" << z
       << " (error estimate " << r.error << ")";
    throw ConvergenceError(os.str(), r.error);
  }
  return {r.value, r.error, tail(cutoff), cutoff};
}

double kernel_laplace(const KernelSpec& spec, double z) {
  return kernel_laplace_detail(spec, z).value;
}

MalthusSolution malthus_solve_detail(const KernelSpec& spec, double a_n) {
  if (!(a_n > 1.0) || !std::isfinite(a_n)) throw DomainError("malthus_solve: a_n must exceed 1");
  const double target = 1.0 / (a_n * a_n);
  auto L = [&](double z) { return kernel_laplace(spec, z); };

  double lo = kBracketLow;
  double hi = kBracketHigh;
  const double f_lo = L(lo) - target;
  const double f_hi = L(hi) - target;
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os << "malthus_solve: cannot bracket root in [" << lo << ", " << hi << "] for a_n=" << a_n;
    throw ConvergenceError(os.str(), std::min(std::abs(f_lo), std::abs(f_hi)));
  }

  MalthusSolution sol;
  while (hi - lo > kBisectionWidth && sol.bisection_steps < 500) {
    // Geometric midpoints while the bracket spans orders of magnitude.
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (L(mid) > target ? lo : hi) = mid;
    ++sol.bisection_steps;
  }

  double b = 0.5 * (lo + hi);
  double res = L(b) - target;
  for (int k = 0; k < kMaxNewton && res != 0.0; ++k) {
    const double h = 1e-4 * b;
    const double slope = (L(b + h) - L(b - h)) / (2.0 * h);
    if (!(slope < 0.0)) break;
    const double candidate = b - res / slope;
    if (!(candidate > 0.0)) break;
    const double cres = L(candidate) - target;
    ++sol.newton_steps;
    if (std::abs(cres) >= std::abs(res)) break;
    b = candidate;
    res = cres;
  }
  sol.b = b;
  sol.residual = std::abs(res);
  return sol;
}

double malthus_solve(const KernelSpec& spec, double a_n) {
  return malthus_solve_detail(spec, a_n).b;
}

double ScalingScheme::count_scale() const {
  return std::pow(static_cast<double>(n), 2.0 * alpha());
}

ScalingScheme ScalingScheme::without_excitation() const {
  ScalingScheme s = *this;
  s.excitation = false;
  return s;
}

ScalingScheme make_scheme(const KernelSpec& kernel, double lambda, double mu_star,
                          std::int64_t n) {
  kernel.validate();
  if (!kernel.heavy_tailed()) throw DomainError("make_scheme: kernel must be heavy-tailed");
  if (!(lambda > 0.0)) throw DomainError("make_scheme: lambda must be positive");
  if (!(mu_star > 0.0)) throw DomainError("make_scheme: mu_star must be positive");
  if (n < 1) throw DomainError("make_scheme: n must be >= 1");
  if (!(kernel.alpha > 0.5)) {
    std::ostringstream os;
    os << "alpha=" << kernel.alpha << " lies outside the supported regime (1/2, 1)";
    warn(os.str());
  }

  ScalingScheme s;
  s.kernel = kernel;
  s.n = n;
  s.lambda = lambda;
  s.mu_star = mu_star;
  s.delta = kernel.delta();
  const double nd = static_cast<double>(n);
  s.a_n = 1.0 + lambda * s.delta * std::pow(nd, -kernel.alpha);
  s.mu_n = mu_star * s.delta * std::pow(nd, kernel.alpha - 1.0);
  const auto sol = malthus_solve_detail(kernel, s.a_n);
  s.b_n = sol.b;
  s.malthus_residual = sol.residual;
  return s;
}

ScalingScheme make_scheme(double alpha, double lambda, double mu_star, std::int64_t n) {
  return make_scheme(KernelSpec::shifted_pareto(alpha), lambda, mu_star, n);
}

double malthus_limit(double alpha, double lambda) {
  return std::pow(2.0 * lambda, 1.0 / alpha);
}

double expected_count_bound(const ScalingScheme& s) {
  const double nd = static_cast<double>(s.n);
  return s.mu_n * nd * std::exp(nd * s.b_n) * s.a_n / ((s.a_n - 1.0) * s.count_scale());
}

}  // namespace roughhawkes
