#pragma once

// Convergence study: rescaled Hawkes ensembles against the limit process,
// plus the deterministic checks on the kernel, resolvent and Mittag-Leffler
// layers. Every gate is evaluated and reported; nothing here decides what a
// caller does with a failure.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "roughhawkes/hawkes.hpp"
#include "roughhawkes/limit.hpp"
#include "roughhawkes/stats.hpp"

namespace roughhawkes {

inline constexpr int kReportSchemaVersion = 1;
/// Width of every statistical gate, in standard errors.
inline constexpr double kSigmaGate = 3.0;
/// KS gates reject below this p-value.
inline constexpr double kKsLevel = 0.01;

// Flat key = value configuration; '#' starts a comment. Keys mirror the
// field names below; lists are comma separated.
struct StudyConfig {
  double alpha = 0.75;
  double lambda = 0.5;
  double mu_star = 1.0;
  std::vector<std::int64_t> n_list{200, 1000, 5000};
  std::size_t paths = 500;
  std::size_t grid = 256;  // intervals of the uniform output grid on [0, 1]
  double h = 1.0 / 1024.0;
  std::uint64_t master_seed = 20240917;
  std::string output_dir = "converge-out";
  unsigned threads = 0;    // 0: hardware concurrency; never affects results
  bool excitation = true;  // false: Poisson test mode (kernel switched off)

  // Auxiliary experiments.
  std::size_t limit_paths = 5000;
  std::size_t coupled_paths = 1000;  // step h vs h/2 with shared noise
  std::int64_t agreement_n = 100;
  std::size_t agreement_paths = 2000;
  std::int64_t moment_n = 1000;
  std::size_t moment_paths = 2000;
  double moment_dt = 0.05;
  std::int64_t mass_n = 1000;
  double mass_dt = 1.0;
  double mass_horizon_factor = 50.0;  // horizon = factor / b_n
  std::vector<std::int64_t> klp_n{100, 1000, 10000};
  double klp_dt = 0.25;
  std::vector<std::int64_t> malthus_n{100, 1000, 10000, 100000};

  void validate() const;
  unsigned resolved_threads() const;
};

StudyConfig parse_config(std::istream& in);
StudyConfig load_config(const std::filesystem::path& file);
/// Serializes every key, in a form parse_config reads back.
std::string to_config_text(const StudyConfig& cfg);

struct GateResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MalthusRow {
  std::int64_t n = 0;
  double a_n = 0.0, b_n = 0.0, n_b_n = 0.0, limit = 0.0, relative_error = 0.0, residual = 0.0;
};

struct KernelExpansionRow {
  double z = 0.0;
  double one_minus_laplace = 0.0;  // 1 - Lphi(z)
  double ratio = 0.0;              // (1 - Lphi(z)) / z^alpha
  double abs_error = 0.0;          // |ratio - delta|
  double relative_error = 0.0;
};

struct LaplaceRow {
  double alpha = 0.0, lambda = 0.0, z = 0.0, residual = 0.0;
};

struct MassCheck {
  std::int64_t n = 0;
  double dt = 0.0, horizon = 0.0, total = 0.0, target = 0.0, relative_error = 0.0;
  double brute_force_max_diff = 0.0;
};

struct KlpRow {
  std::int64_t n = 0;
  double dt = 0.0, sup_distance = 0.0;
};

struct AgreementCheck {
  std::int64_t n = 0;
  std::size_t paths = 0;
  std::vector<double> horizons;
  std::vector<KsResult> ks;  // one per horizon; the gate uses the last (T = n)
  Estimate thinning_mean, cluster_mean;
};

struct FirstMomentRow {
  double t = 0.0;  // rescaled time
  Estimate count;  // MC mean of Z_{nt}
  double expected = 0.0;
  double z_score = 0.0;
};

struct EnsembleSummary {
  std::int64_t n = 0;
  double a_n = 0.0, mu_n = 0.0, b_n = 0.0;
  std::size_t paths = 0;
  std::size_t failed_paths = 0;
  Estimate events;
  std::vector<MomentRow> X_moments;  // at t = 0.25, 0.5, 0.75, 1
  std::vector<Estimate> Mbar_means;  // at t = 0.25, 0.5, 1
  Estimate sup_gap;                  // sup_t (X - Lambda)^2
  double sup_gap_bound = 0.0;        // 4 E[X_1] / n^(2 alpha)
  Estimate X1;
  double mean_error = 0.0;           // |mean X_1 - deterministic mean|
  KsResult ks_vs_limit;
};

struct LimitSummary {
  std::size_t paths = 0;
  double h = 0.0;
  std::vector<double> times;         // 0.25, 0.5, 1
  std::vector<Estimate> Y_means;
  std::vector<double> Y_targets;     // mu* delta F(t)
  Estimate X1;
  double X1_target = 0.0;            // deterministic_mean_X(1)
  double X1_discrete_target = 0.0;   // h sum of the skeleton
  double clip_fraction_mean = 0.0;
  double clip_fraction_max = 0.0;
  double roughness_Y = 0.0;          // diagnostic only
  double roughness_X = 0.0;
  Estimate coupled_Y1_diff;          // Y_h(1) - Y_{2h}(1) with coupled noise
  double coupled_relative_diff = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<LaplaceRow> laplace;
  std::vector<KernelExpansionRow> kernel_expansion;
  std::vector<MalthusRow> malthus;
  MassCheck mass;
  std::vector<KlpRow> klp;
  AgreementCheck agreement;
  std::vector<FirstMomentRow> first_moment;
  LimitSummary limit;
  std::vector<EnsembleSummary> ensembles;
  std::vector<GateResult> gates;

  bool all_passed() const;
  std::string to_json() const;
  /// report.json plus CSV tables in `dir`.
  void write(const std::filesystem::path& dir) const;
};

using ProgressFn = std::function<void(const std::string&)>;

ConvergenceReport run_convergence_study(const StudyConfig& cfg, const ProgressFn& progress = {});

// Individual gate computations, reused by the CLI subcommands.
std::vector<LaplaceRow> laplace_identity_rows();
std::vector<KernelExpansionRow> kernel_expansion_rows(const KernelSpec& kernel);
std::vector<MalthusRow> malthus_table(double alpha, double lambda,
                                      const std::vector<std::int64_t>& ns);
MassCheck resolvent_mass_check(const ScalingScheme& scheme, double dt, double horizon_factor);
/// max |brute-force sum of convolution powers - renewal recursion| on 64 cells.
double convolution_series_check(const ScalingScheme& scheme, double dt, std::size_t cells,
                                int powers);
std::vector<KlpRow> klp_table(double alpha, double lambda, const std::vector<std::int64_t>& ns,
                              double dt);

/// Runs f(0..count-1) on `threads` workers; results are stored by index, so
/// the output does not depend on scheduling. Exceptions are captured per index.
template <class R>
struct Outcome {
  std::optional<R> value;
  std::exception_ptr error;
};

template <class R, class F>
std::vector<Outcome<R>> parallel_map(std::size_t count, unsigned threads, F&& f) {
  std::vector<Outcome<R>> out(count);
  auto run = [&](std::size_t i) {
    try {
      out[i].value.emplace(f(i));
    } catch (...) {
      out[i].error = std::current_exception();
    }
  };
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) run(i);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(threads, count);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) run(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace roughhawkes
