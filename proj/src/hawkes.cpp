#include "roughhawkes/hawkes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "roughhawkes/errors.hpp"

namespace roughhawkes {

namespace {

// Kernel evaluation without argument checks, for the inner loops.
struct FastKernel {
  KernelFamily family;
  double alpha, scale, inv_scale, head;

  explicit FastKernel(const KernelSpec& k)
      : family(k.family), alpha(k.alpha), scale(k.scale), inv_scale(1.0 / k.scale),
        head(k.family == KernelFamily::ShiftedPareto ? k.alpha / k.scale : k.scale) {}

  double density(double x) const {
    if (family == KernelFamily::ShiftedPareto) {
      return head * std::pow(1.0 + x * inv_scale, -1.0 - alpha);
    }
    return head * std::exp(-scale * x);
  }
  double cdf(double x) const {
    if (family == KernelFamily::ShiftedPareto) {
      return -std::expm1(-alpha * std::log1p(x * inv_scale));
    }
    return -std::expm1(-scale * x);
  }
  double quantile(double u) const {
    if (family == KernelFamily::ShiftedPareto) {
      return scale * std::expm1(-std::log1p(-u) / alpha);
    }
    return -std::log1p(-u) / scale;
  }
};

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("simulation horizon must be positive");
}

[[noreturn]] void budget_exceeded(std::size_t events, std::size_t cap) {
  std::ostringstream os;
  os << "event budget of " << cap << " exceeded; path refused";
  throw BudgetExceeded(os.str(), events);
}

bool is_uniform_from_zero(std::span<const double> grid) {
  if (grid.size() < 3 || grid.front() != 0.0) return false;
  const double step = grid[1] - grid[0];
  if (!(step > 0.0)) return false;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (std::abs(grid[k] - static_cast<double>(k) * step) > 1e-12 * grid.back()) return false;
  }
  return true;
}

void finish_rescaled(RescaledPath& out, const ScalingScheme& s) {
  out.n_alpha = std::pow(static_cast<double>(s.n), s.alpha());
  out.Mbar.resize(out.X.size());
  for (std::size_t k = 0; k < out.X.size(); ++k) {
    out.Mbar[k] = out.n_alpha * (out.X[k] - out.Lambda[k]);
  }
}

void check_rescale_inputs(const EventSequence& ev, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("rescale: empty grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw DomainError("rescale: grid must lie in [0, 1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw DomainError("rescale: grid must increase");
  }
  const double needed = static_cast<double>(ev.scheme.n) * grid.back();
  if (ev.horizon < needed * (1.0 - 1e-12)) {
    throw DomainError("rescale: path horizon shorter than n * max(grid)");
  }
}

}  // namespace

SeedRecord make_seed(std::uint64_t master, std::uint64_t path) {
  return {master, path, path_seed(master, path)};
}

std::size_t EventSequence::count_until(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

EventSequence simulate_thinning(const ScalingScheme& scheme, double T, SeedRecord seed,
                                const ThinningOptions& opt) {
  check_horizon(T);
  const FastKernel k(scheme.kernel);
  const double a = scheme.branching();
  const double mu = scheme.mu_n;
  Rng rng(seed.stream);

  EventSequence ev;
  ev.horizon = T;
  ev.scheme = scheme;
  ev.seed = seed;
  auto& times = ev.times;

  // The kernel is nonincreasing, so between events the intensity right after
  // the last evaluated point dominates the intensity further on.
  double t = 0.0;
  double bound = mu;
  std::size_t first = 0;
  while (true) {
    if (!(bound > 0.0)) break;
    t += rng.exponential(bound);
    if (t > T) break;
    if (opt.tail_cutoff > 0.0) {
      while (first < times.size() && t - times[first] > opt.tail_cutoff) ++first;
    }
    double lam = 0.0;
    for (std::size_t i = first; i < times.size(); ++i) lam += k.density(t - times[i]);
    lam = mu + a * lam;
    if (opt.observer) opt.observer(t, lam);
    if (rng.uniform() * bound <= lam) {
      if (times.size() >= opt.max_events) budget_exceeded(times.size(), opt.max_events);
      times.push_back(t);
      bound = lam + a * k.head;
    } else {
      bound = lam;
    }
  }
  return ev;
}

EventSequence simulate_cluster(const ScalingScheme& scheme, double T, SeedRecord seed,
                               const ClusterOptions& opt, ClusterDiagnostics* diagnostics) {
  check_horizon(T);
  const FastKernel k(scheme.kernel);
  const double a = scheme.branching();
  const double mu = scheme.mu_n;
  Rng rng(seed.stream);

  EventSequence ev;
  ev.horizon = T;
  ev.scheme = scheme;
  ev.seed = seed;
  auto& times = ev.times;
  ClusterDiagnostics diag;

  auto push = [&](double x) {
    if (times.size() >= opt.max_events) budget_exceeded(times.size(), opt.max_events);
    times.push_back(x);
  };

  if (mu > 0.0) {
    for (double t = rng.exponential(mu); t <= T; t += rng.exponential(mu)) push(t);
  }
  diag.immigrants = times.size();

  // Breadth-first over the growing event list; every event is a parent once.
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double parent = times[i];
    const auto children = rng.poisson(a);
    for (std::uint64_t c = 0; c < children; ++c) {
      const double child = parent + k.quantile(rng.uniform());
      if (child <= T) {
        push(child);
        ++diag.offspring_kept;
      } else {
        ++diag.offspring_discarded;
      }
    }
  }
  std::sort(times.begin(), times.end());
  if (diagnostics) *diagnostics = diag;
  return ev;
}

double intensity_path(const EventSequence& events, double t) {
  if (!(t >= 0.0 && t <= events.horizon)) throw DomainError("intensity_path: t outside [0, T]");
  const FastKernel k(events.scheme.kernel);
  const auto end = std::lower_bound(events.times.begin(), events.times.end(), t);
  double sum = 0.0;
  for (auto it = events.times.begin(); it != end; ++it) sum += k.density(t - *it);
  return events.scheme.mu_n + events.scheme.branching() * sum;
}

double compensator(const EventSequence& events, double t) {
  if (!(t >= 0.0 && t <= events.horizon)) throw DomainError("compensator: t outside [0, T]");
  const FastKernel k(events.scheme.kernel);
  const auto end = std::lower_bound(events.times.begin(), events.times.end(), t);
  double sum = 0.0;
  for (auto it = events.times.begin(); it != end; ++it) sum += k.cdf(t - *it);
  return events.scheme.mu_n * t + events.scheme.branching() * sum;
}

std::vector<double> uniform_grid(std::size_t intervals) {
  if (intervals == 0) throw DomainError("uniform_grid: need at least one interval");
  std::vector<double> g(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    g[k] = static_cast<double>(k) / static_cast<double>(intervals);
  }
  return g;
}

RescaledPath rescale_direct(const EventSequence& events, std::span<const double> grid) {
  check_rescale_inputs(events, grid);
  const auto& s = events.scheme;
  const double n = static_cast<double>(s.n);
  const double inv_scale = 1.0 / s.count_scale();
  RescaledPath out;
  out.grid.assign(grid.begin(), grid.end());
  for (double g : grid) {
    const double tau = std::min(n * g, events.horizon);
    out.X.push_back(static_cast<double>(events.count_until(tau)) * inv_scale);
    out.Lambda.push_back(compensator(events, tau) * inv_scale);
  }
  finish_rescaled(out, s);
  return out;
}

RescaledPath rescale(const EventSequence& events, std::span<const double> grid) {
  const auto& s = events.scheme;
  if (s.kernel.family != KernelFamily::ShiftedPareto || !is_uniform_from_zero(grid)) {
    return rescale_direct(events, grid);
  }
  check_rescale_inputs(events, grid);

  // For the shifted Pareto kernel, sum_i F(tau - t_i) = N(tau-) - S(tau) with
  // S(tau) = sum_i (1 + (tau - t_i)/c)^-alpha. Events in the bin just below tau
  // are summed exactly; older bins use the binomial expansion of
  // (A - d)^-alpha around the bin centre, whose ratio |d| / A is below 1/3.
  constexpr int kTerms = 32;
  const double n = static_cast<double>(s.n);
  const double alpha = s.alpha();
  const double c = s.kernel.scale;
  const std::size_t bins = grid.size() - 1;
  const double width = n * grid.back() / static_cast<double>(bins);
  const double half = 0.5 * width;
  const auto& t = events.times;

  std::vector<double> tau(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) tau[k] = std::min(n * grid[k], events.horizon);

  // Bin membership and normalized moments sum_i ((t_i - m_j) / half)^p.
  std::vector<std::size_t> bin_begin(bins + 1);
  std::vector<std::array<double, kTerms>> moments(bins);
  for (std::size_t j = 0; j <= bins; ++j) {
    bin_begin[j] = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), tau[j]) - t.begin());
  }
  for (std::size_t j = 0; j < bins; ++j) {
    auto& m = moments[j];
    m.fill(0.0);
    const double centre = tau[j] + half;
    for (std::size_t i = bin_begin[j]; i < bin_begin[j + 1]; ++i) {
      const double d = (t[i] - centre) / half;
      double pw = 1.0;
      for (int p = 0; p < kTerms; ++p) {
        m[p] += pw;
        pw *= d;
      }
    }
  }
  std::array<double, kTerms> coef{};
  coef[0] = 1.0;
  for (int p = 0; p + 1 < kTerms; ++p) coef[p + 1] = coef[p] * (alpha + p) / (p + 1);

  const double inv_scale = 1.0 / s.count_scale();
  const double a = s.branching();
  RescaledPath out;
  out.grid.assign(grid.begin(), grid.end());
  out.X.resize(grid.size());
  out.Lambda.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double S = 0.0;
    if (k >= 1) {
      for (std::size_t i = bin_begin[k - 1]; i < bin_begin[k]; ++i) {
        S += std::exp(-alpha * std::log1p((tau[k] - t[i]) / c));
      }
    }
    for (std::size_t j = 0; j + 1 < k; ++j) {
      if (bin_begin[j] == bin_begin[j + 1]) continue;
      const double A = c + tau[k] - (tau[j] + half);
      const double r = half / A;
      double series = 0.0, rp = 1.0;
      for (int p = 0; p < kTerms; ++p) {
        series += coef[p] * rp * moments[j][p];
        rp *= r;
      }
      S += std::pow(A / c, -alpha) * series;
    }
    const double below = static_cast<double>(k >= 1 ? bin_begin[k] : 0);
    out.X[k] = static_cast<double>(events.count_until(tau[k])) * inv_scale;
    out.Lambda[k] = (s.mu_n * tau[k] + a * (below - S)) * inv_scale;
  }
  finish_rescaled(out, s);
  return out;
}

double RescaledPath::sup_squared_gap() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const double d = X[k] - Lambda[k];
    worst = std::max(worst, d * d);
  }
  return worst;
}

double quadratic_variation_Mbar(const EventSequence& events, double t) {
  const auto& s = events.scheme;
  const double jump = 1.0 / std::pow(static_cast<double>(s.n), s.alpha());
  const double limit = static_cast<double>(s.n) * t;
  double qv = 0.0;
  for (double ti : events.times) {
    if (ti > limit) break;
    qv += jump * jump;
  }
  return qv;
}

void write_events_csv(std::ostream& os, const EventSequence& ev) {
  const auto& s = ev.scheme;
  os << std::setprecision(17);
  os << "# family=" << to_string(s.kernel.family) << '\n'
     << "# alpha=" << s.alpha() << '\n'
     << "# kernel_scale=" << s.kernel.scale << '\n'
     << "# n=" << s.n << '\n'
     << "# lambda=" << s.lambda << '\n'
     << "# mu_star=" << s.mu_star << '\n'
     << "# a_n=" << s.a_n << '\n'
     << "# mu_n=" << s.mu_n << '\n'
     << "# b_n=" << s.b_n << '\n'
     << "# excitation=" << (s.excitation ? 1 : 0) << '\n'
     << "# horizon=" << ev.horizon << '\n'
     << "# master_seed=" << ev.seed.master << '\n'
     << "# path=" << ev.seed.path << '\n'
     << "# events=" << ev.times.size() << '\n'
     << "time\n";
  for (double t : ev.times) os << t << '\n';
}

void write_rescaled_csv(std::ostream& os, const RescaledPath& p) {
  os << "t,X,Lambda,Mbar\n" << std::setprecision(17);
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    os << p.grid[k] << ',' << p.X[k] << ',' << p.Lambda[k] << ',' << p.Mbar[k] << '\n';
  }
}

}  // namespace roughhawkes
