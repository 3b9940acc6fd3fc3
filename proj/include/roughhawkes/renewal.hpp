#pragma once

// Discretized resolvents of the Hawkes kernel.
//
// The grid has nodes t_k = k dt. Node k owns the cell [(k - 1/2) dt, (k + 1/2) dt),
// except node 0 whose cell is [0, dt/2). Kernels enter as exact cell masses
// (differences of the CDF) placed at the node, so convolution of two cell
// masses lands exactly on node i + j and the discrete renewal equation
//     p = w + w * p
// conserves mass: sum(p) = sum(w) / (1 - sum(w)). Densities are recovered by
// spreading each cell mass uniformly over its cell.
//
// Production grids solve the tilted (subcritical) equation with
// w~_k = exp(-b_n t_k) w_k and apply the tilt exp(b_n t_k) afterwards; since
// exp(-b t_i) exp(-b t_j) = exp(-b t_{i+j}) on the lattice, the tilt identity
// holds cell by cell.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughhawkes/model.hpp"

namespace roughhawkes {

struct RenewalGrid {
  ScalingScheme scheme;
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<double> kernel_mass;        // w~_k, tilted kernel cell masses
  std::vector<double> psi_tilde_mass;     // p~_k, tilted resolvent cell masses
  std::vector<double> psi_mass;           // exp(b t_k) p~_k
  std::vector<double> psi_prefix;         // int_0^{edge k} Psi^n, one per cell edge
  std::vector<double> psi_prefix2;        // int_0^{edge k} int_0^s Psi^n

  std::size_t size() const { return psi_mass.size(); }
  double node(std::size_t k) const { return static_cast<double>(k) * dt; }
  double cell_width(std::size_t k) const { return k == 0 ? 0.5 * dt : dt; }
  /// Left edge of cell k.
  double cell_start(std::size_t k) const { return k == 0 ? 0.0 : (k - 0.5) * dt; }

  double psi_tilde(std::size_t k) const { return psi_tilde_mass[k] / cell_width(k); }
  double psi(std::size_t k) const { return psi_mass[k] / cell_width(k); }

  /// int_0^u Psi^n (piecewise linear between cell edges).
  double cumulative_psi(double u) const;
  /// int_0^u int_0^s Psi^n = int_0^u (u - s) Psi^n(s) ds.
  double double_cumulative_psi(double u) const;

  /// sum of tilted resolvent masses, approximating ||Psi~^n||_1 on [0, horizon].
  double psi_tilde_total() const;
};

/// Exact cell masses a_n (F(cell end) - F(cell start)) of phi^n on `cells` nodes.
std::vector<double> kernel_cell_masses(const ScalingScheme& scheme, double dt,
                                       std::size_t cells);

/// Solves p = w + w * p by forward recursion.
std::vector<double> solve_renewal(std::span<const double> w);

/// Tilted recursion plus exponential tilt on [0, horizon].
RenewalGrid resolvent_grid(const ScalingScheme& scheme, double dt, double horizon);

/// Psi^n cell masses from the untilted (supercritical) recursion. Only for
/// short horizons; used to cross-check the tilt.
std::vector<double> untilted_resolvent_masses(const ScalingScheme& scheme, double dt,
                                              double horizon);

/// max_k |p_k - w_k - (w * p)_k| over the grid.
double renewal_residual(std::span<const double> w, std::span<const double> p);

/// Rescaled resolvent on [0, 1]:
///   K^n(t) = n^(1-alpha) Psi^n(n t),   F^n(t) = int_0^t K^n.
struct RescaledResolvent {
  std::vector<double> t;  // rescaled nodes k dt / n, up to t <= 1
  std::vector<double> K;  // K^n at t
  std::vector<double> F;  // F^n at t
};

RescaledResolvent K_n_grid(const RenewalGrid& grid);

/// F^n at the cell edges inside [0, 1] (t[0] = 0, F[0] = 0), where the
/// running integral is exact for the discretized resolvent.
struct CumulativeCurve {
  std::vector<double> t;
  std::vector<double> F;
};
CumulativeCurve F_n_grid(const RenewalGrid& grid);

/// sup over F_n_grid points of |F^n - F^{alpha,lambda}|.
double sup_distance_to_limit(const RenewalGrid& grid);

/// E[Z_t^n] = mu_n t + mu_n int_0^t s Psi^n(t - s) ds, t in unscaled time.
double expected_count(const RenewalGrid& grid, double t);
/// E[lambda_t^n] = mu_n + mu_n int_0^t Psi^n.
double expected_intensity(const RenewalGrid& grid, double t);

/// CSV with columns t, psi_tilde, psi, K_n, F_n (t in unscaled time).
void write_grid_csv(std::ostream& os, const RenewalGrid& grid);

}  // namespace roughhawkes
