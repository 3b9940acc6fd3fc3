#include "roughhawkes/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/mlf.hpp"

namespace roughhawkes {

namespace {

std::size_t node_count(double dt, double horizon) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("renewal grid: dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) {
    throw DomainError("renewal grid: horizon must be >= dt");
  }
  return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9)) + 1;
}

void fill_prefixes(RenewalGrid& g) {
  const std::size_t n = g.psi_mass.size();
  g.psi_prefix.assign(n + 1, 0.0);
  g.psi_prefix2.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    g.psi_prefix[k + 1] = g.psi_prefix[k] + g.psi_mass[k];
    g.psi_prefix2[k + 1] =
        g.psi_prefix2[k] + 0.5 * g.cell_width(k) * (g.psi_prefix[k] + g.psi_prefix[k + 1]);
  }
}

// Cell containing u, clamped to the grid; u must not exceed the last edge.
std::size_t locate(const RenewalGrid& g, double u) {
  const double last_edge = g.cell_start(g.size() - 1) + g.cell_width(g.size() - 1);
  if (!(u >= 0.0) || u > last_edge * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "renewal grid: time " << u << " outside [0, " << last_edge << "]";
    throw DomainError(os.str());
  }
  if (u < 0.5 * g.dt) return 0;
  const auto k = static_cast<std::size_t>(std::floor(u / g.dt + 0.5));
  return std::min(k, g.size() - 1);
}

LimitKernel limit_kernel_of(const ScalingScheme& s) {
  return {s.alpha(), s.lambda, s.delta};
}

void require_unit_horizon(const RenewalGrid& g) {
  const double n = static_cast<double>(g.scheme.n);
  if (g.horizon + 0.5 * g.dt < n) {
    throw DomainError("rescaled resolvent: grid horizon shorter than n");
  }
}

}  // namespace

std::vector<double> kernel_cell_masses(const ScalingScheme& scheme, double dt,
                                       std::size_t cells) {
  const double a = scheme.branching();
  std::vector<double> w(cells);
  if (cells == 0) return w;
  w[0] = a * kernel_cdf(scheme.kernel, 0.5 * dt);
  for (std::size_t k = 1; k < cells; ++k) {
    const double lo = (static_cast<double>(k) - 0.5) * dt;
    w[k] = a * (kernel_survival(scheme.kernel, lo) - kernel_survival(scheme.kernel, lo + dt));
  }
  return w;
}

std::vector<double> solve_renewal(std::span<const double> w) {
  const std::size_t n = w.size();
  std::vector<double> p(n, 0.0);
  if (n == 0) return p;
  if (*std::max_element(w.begin(), w.end()) >= 1.0) {
    throw DomainError("renewal grid: kernel mass per cell reaches 1; refine dt");
  }
  const double inv = 1.0 / (1.0 - w[0]);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = w[k];
    const double* pk = p.data() + k;
    for (std::size_t j = 1; j <= k; ++j) acc += w[j] * pk[-static_cast<std::ptrdiff_t>(j)];
    p[k] = acc * inv;
  }
  return p;
}

double renewal_residual(std::span<const double> w, std::span<const double> p) {
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double conv = 0.0;
    for (std::size_t j = 0; j <= k; ++j) conv += w[j] * p[k - j];
    worst = std::max(worst, std::abs(p[k] - w[k] - conv));
  }
  return worst;
}

RenewalGrid resolvent_grid(const ScalingScheme& scheme, double dt, double horizon) {
  const std::size_t n = node_count(dt, horizon);
  RenewalGrid g;
  g.scheme = scheme;
  g.dt = dt;
  g.horizon = horizon;
  g.kernel_mass = kernel_cell_masses(scheme, dt, n);
  for (std::size_t k = 0; k < n; ++k) g.kernel_mass[k] *= std::exp(-scheme.b_n * g.node(k));
  g.psi_tilde_mass = solve_renewal(g.kernel_mass);
  g.psi_mass.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    g.psi_mass[k] = std::exp(scheme.b_n * g.node(k)) * g.psi_tilde_mass[k];
  }
  fill_prefixes(g);
  return g;
}

std::vector<double> untilted_resolvent_masses(const ScalingScheme& scheme, double dt,
                                              double horizon) {
  const auto w = kernel_cell_masses(scheme, dt, node_count(dt, horizon));
  return solve_renewal(w);
}

double RenewalGrid::cumulative_psi(double u) const {
  const std::size_t k = locate(*this, u);
  const double frac = std::clamp((u - cell_start(k)) / cell_width(k), 0.0, 1.0);
  return psi_prefix[k] + frac * psi_mass[k];
}

double RenewalGrid::double_cumulative_psi(double u) const {
  const std::size_t k = locate(*this, u);
  const double s = std::clamp(u - cell_start(k), 0.0, cell_width(k));
  return psi_prefix2[k] + s * psi_prefix[k] + psi_mass[k] * s * s / (2.0 * cell_width(k));
}

double RenewalGrid::psi_tilde_total() const {
  double total = 0.0;
  for (double m : psi_tilde_mass) total += m;
  return total;
}

RescaledResolvent K_n_grid(const RenewalGrid& grid) {
  require_unit_horizon(grid);
  const double n = static_cast<double>(grid.scheme.n);
  const double alpha = grid.scheme.alpha();
  const double k_scale = std::pow(n, 1.0 - alpha);
  const double f_scale = std::pow(n, -alpha);
  RescaledResolvent out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double u = grid.node(k);
    if (u > n * (1.0 + 1e-12)) break;
    out.t.push_back(u / n);
    out.K.push_back(k_scale * grid.psi(k));
    out.F.push_back(f_scale * grid.cumulative_psi(u));
  }
  return out;
}

CumulativeCurve F_n_grid(const RenewalGrid& grid) {
  require_unit_horizon(grid);
  const double n = static_cast<double>(grid.scheme.n);
  const double f_scale = std::pow(n, -grid.scheme.alpha());
  CumulativeCurve out;
  out.t.push_back(0.0);
  out.F.push_back(0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double edge = grid.cell_start(k) + grid.cell_width(k);
    if (edge > n * (1.0 + 1e-12)) break;
    out.t.push_back(edge / n);
    out.F.push_back(f_scale * grid.psi_prefix[k + 1]);
  }
  return out;
}

double sup_distance_to_limit(const RenewalGrid& grid) {
  const auto curve = F_n_grid(grid);
  const auto lk = limit_kernel_of(grid.scheme);
  double worst = 0.0;
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    worst = std::max(worst, std::abs(curve.F[i] - limit_kernel_F(lk, curve.t[i])));
  }
  return worst;
}

double expected_count(const RenewalGrid& grid, double t) {
  if (!(t >= 0.0)) throw DomainError("expected_count: t must be >= 0");
  const double mu = grid.scheme.mu_n;
  if (mu == 0.0 || t == 0.0) return 0.0;
  return mu * t + mu * grid.double_cumulative_psi(t);
}

double expected_intensity(const RenewalGrid& grid, double t) {
  if (!(t >= 0.0)) throw DomainError("expected_intensity: t must be >= 0");
  const double mu = grid.scheme.mu_n;
  return mu + mu * grid.cumulative_psi(t);
}

void write_grid_csv(std::ostream& os, const RenewalGrid& grid) {
  const double n = static_cast<double>(grid.scheme.n);
  const double alpha = grid.scheme.alpha();
  const double k_scale = std::pow(n, 1.0 - alpha);
  const double f_scale = std::pow(n, -alpha);
  os << "t,psi_tilde,psi,K_n,F_n\n" << std::setprecision(17);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double u = grid.node(k);
    os << u << ',' << grid.psi_tilde(k) << ',' << grid.psi(k) << ',' << k_scale * grid.psi(k)
       << ',' << f_scale * grid.cumulative_psi(u) << '\n';
  }
}

}  // namespace roughhawkes
