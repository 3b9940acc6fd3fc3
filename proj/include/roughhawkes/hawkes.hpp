#pragma once

// Exact simulation of the Hawkes process with intensity
//     lambda_t = mu_n + sum_{t_i < t} a_n phi(t - t_i)
// on [0, T], started from an empty history, by two independent methods:
// Ogata thinning and the branching (cluster) construction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "roughhawkes/model.hpp"
#include "roughhawkes/rng.hpp"

namespace roughhawkes {

inline constexpr std::size_t kDefaultEventBudget = 10'000'000;

struct SeedRecord {
  std::uint64_t master = 0;
  std::uint64_t path = 0;
  std::uint64_t stream = 0;  // path_seed(master, path)
};

struct EventSequence {
  std::vector<double> times;  // strictly increasing, in [0, horizon]
  double horizon = 0.0;
  ScalingScheme scheme;
  SeedRecord seed;

  std::size_t count_until(double t) const;  // #{t_i <= t}
};

struct ThinningOptions {
  std::size_t max_events = kDefaultEventBudget;
  /// Events older than this lag are dropped from the intensity sum
  /// (0 disables the cutoff and keeps the sum exact).
  double tail_cutoff = 0.0;
  /// Called with (candidate time, intensity left limit) for every candidate.
  std::function<void(double, double)> observer;
};

EventSequence simulate_thinning(const ScalingScheme& scheme, double T, SeedRecord seed,
                                const ThinningOptions& opt = {});

struct ClusterOptions {
  std::size_t max_events = kDefaultEventBudget;
};

struct ClusterDiagnostics {
  std::size_t immigrants = 0;
  std::size_t offspring_kept = 0;       // children landing in [0, T]
  std::size_t offspring_discarded = 0;  // children beyond T
};

EventSequence simulate_cluster(const ScalingScheme& scheme, double T, SeedRecord seed,
                               const ClusterOptions& opt = {},
                               ClusterDiagnostics* diagnostics = nullptr);

SeedRecord make_seed(std::uint64_t master, std::uint64_t path);

/// lambda(t-) = mu_n + sum_{t_i < t} a_n phi(t - t_i), by fresh summation.
double intensity_path(const EventSequence& events, double t);

/// int_0^t lambda_s ds = mu_n t + a_n sum_{t_i < t} F(t - t_i), by direct summation.
double compensator(const EventSequence& events, double t);

/// Rescaled observables on a grid of [0, 1]:
///   X_t = Z_{nt} / n^(2 alpha),  Lambda_t = n^(-2 alpha) int_0^{nt} lambda,
///   Mbar_t = n^alpha (X_t - Lambda_t).
struct RescaledPath {
  std::vector<double> grid;
  std::vector<double> X;
  std::vector<double> Lambda;
  std::vector<double> Mbar;
  double n_alpha = 1.0;  // n^alpha

  /// max over the grid of (X - Lambda)^2.
  double sup_squared_gap() const;
};

/// Uses a far-field expansion of the shifted-Pareto CDF sum on uniform
/// grids (relative error ~1e-14) and direct summation otherwise.
RescaledPath rescale(const EventSequence& events, std::span<const double> grid);
/// Direct O(events x grid) summation; reference for `rescale`.
RescaledPath rescale_direct(const EventSequence& events, std::span<const double> grid);

std::vector<double> uniform_grid(std::size_t intervals);

/// Sum of squared jumps of Mbar on [0, t]: each jump has size n^-alpha.
double quadratic_variation_Mbar(const EventSequence& events, double t);

/// CSV: header comments with metadata, then a `time` column.
void write_events_csv(std::ostream& os, const EventSequence& events);
/// CSV with columns t, X, Lambda, Mbar.
void write_rescaled_csv(std::ostream& os, const RescaledPath& path);

}  // namespace roughhawkes
