// Command-line front end. Exit codes: 0 all gates pass, 2 a gate failed,
// 1 usage or runtime error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/harness.hpp"
#include "roughhawkes/mlf.hpp"
#include "roughhawkes/renewal.hpp"

namespace fs = std::filesystem;
using namespace roughhawkes;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;

  StudyConfig load() const {
    StudyConfig c = config.empty() ? StudyConfig{} : load_config(config);
    if (seed) c.master_seed = *seed;
    if (!out.empty()) c.output_dir = out;
    if (threads) c.threads = *threads;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value study configuration file");
  app->add_option("--seed", c.seed, "master seed (overrides the config)");
  app->add_option("--out", c.out, "output directory (overrides the config)");
  app->add_option("--threads", c.threads, "worker threads; results do not depend on it");
}

int verdict(bool ok) {
  std::cout << (ok ? "all gates pass" : "gate failure") << '\n';
  return ok ? 0 : 2;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw Error("cannot write " + (dir / name).string());
  return os;
}

int kernel_check(const StudyConfig& cfg) {
  const auto kernel = KernelSpec::shifted_pareto(cfg.alpha);
  std::cout << std::setprecision(10);
  const double mass = kernel_laplace(kernel, 1e-300);
  const bool mass_ok = std::abs(mass - 1.0) < 1e-10;
  std::cout << "kernel mass (Laplace transform at 0+): " << mass << (mass_ok ? "  ok" : "  FAIL")
            << '\n';

  std::cout << "\n1 - Lphi(z) against delta z^alpha, delta = " << kernel.delta() << '\n'
            << "z  ratio  abs_error  relative_error\n";
  const auto rows = kernel_expansion_rows(kernel);
  std::vector<double> errs;
  for (const auto& r : rows) {
    std::cout << r.z << "  " << r.ratio << "  " << r.abs_error << "  " << r.relative_error << '\n';
    errs.push_back(r.abs_error);
  }
  const bool exp_ok = strictly_decreasing(errs) && rows.back().relative_error < 0.005;
  std::cout << "expansion gate: " << (exp_ok ? "pass" : "FAIL") << '\n';

  std::cout << "\nLaplace transform of f against lambda / (z^alpha - lambda)\n"
            << "alpha  lambda  z  residual\n";
  double worst = 0.0;
  for (const auto& r : laplace_identity_rows()) {
    std::cout << r.alpha << "  " << r.lambda << "  " << r.z << "  " << r.residual << '\n';
    worst = std::max(worst, r.residual);
  }
  const bool lap_ok = worst < 1e-6;
  std::cout << "laplace gate: " << (lap_ok ? "pass" : "FAIL") << '\n';
  return verdict(mass_ok && exp_ok && lap_ok);
}

int malthus(const StudyConfig& cfg) {
  const auto rows = malthus_table(cfg.alpha, cfg.lambda, cfg.malthus_n);
  std::cout << std::setprecision(12) << "n  a_n  b_n  n*b_n  limit  relative_error  residual\n";
  double worst = 0.0;
  for (const auto& r : rows) {
    std::cout << r.n << "  " << r.a_n << "  " << r.b_n << "  " << r.n_b_n << "  " << r.limit
              << "  " << r.relative_error << "  " << r.residual << '\n';
    worst = std::max(worst, r.residual);
  }
  return verdict(rows.back().relative_error < rows.front().relative_error && worst < 1e-12);
}

int renewal(const StudyConfig& cfg, bool write_grid) {
  std::cout << std::setprecision(10);
  const auto scheme = make_scheme(cfg.alpha, cfg.lambda, cfg.mu_star, cfg.mass_n);
  auto mass = resolvent_mass_check(scheme, cfg.mass_dt, cfg.mass_horizon_factor);
  mass.brute_force_max_diff = convolution_series_check(scheme, 0.01, 64, 40);
  std::cout << "tilted resolvent mass at n=" << mass.n << ": " << mass.total << " vs "
            << mass.target << " (relative error " << mass.relative_error << ")\n"
            << "convolution series vs recursion: " << mass.brute_force_max_diff << '\n';
  const bool mass_ok = mass.relative_error < 0.02 && mass.brute_force_max_diff < 1e-10;

  std::cout << "\nn  dt  sup|F^n - F|\n";
  const auto rows = klp_table(cfg.alpha, cfg.lambda, cfg.klp_n, cfg.klp_dt);
  std::vector<double> d;
  for (const auto& r : rows) {
    std::cout << r.n << "  " << r.dt << "  " << r.sup_distance << '\n';
    d.push_back(r.sup_distance);
  }
  if (write_grid) {
    for (auto n : cfg.klp_n) {
      const auto s = make_scheme(cfg.alpha, cfg.lambda, cfg.mu_star, n);
      auto os = open_out(cfg.output_dir, "resolvent_n" + std::to_string(n) + ".csv");
      write_grid_csv(os, resolvent_grid(s, cfg.klp_dt, static_cast<double>(n)));
    }
  }
  return verdict(mass_ok && strictly_decreasing(d));
}

int simulate_hawkes(const StudyConfig& cfg, std::int64_t n, std::size_t paths,
                    const std::string& method, double horizon_factor) {
  auto scheme = make_scheme(cfg.alpha, cfg.lambda, cfg.mu_star, n);
  if (!cfg.excitation) scheme = scheme.without_excitation();
  const double T = horizon_factor * static_cast<double>(n);
  const auto grid = uniform_grid(cfg.grid);
  for (std::size_t i = 0; i < paths; ++i) {
    const auto seed = make_seed(cfg.master_seed, i);
    const auto ev = method == "thinning" ? simulate_thinning(scheme, T, seed)
                                         : simulate_cluster(scheme, T, seed);
    std::ostringstream name;
    name << "events_n" << n << "_" << std::setw(5) << std::setfill('0') << i << ".csv";
    auto os = open_out(cfg.output_dir, name.str());
    write_events_csv(os, ev);
    if (T >= static_cast<double>(n)) {
      auto rs = open_out(cfg.output_dir, "rescaled" + name.str().substr(6));
      write_rescaled_csv(rs, rescale(ev, grid));
    }
    std::cout << "path " << i << ": " << ev.times.size() << " events\n";
  }
  return 0;
}

int simulate_limit(const StudyConfig& cfg, std::size_t paths) {
  const auto scheme = make_limit_scheme(
      {cfg.alpha, cfg.lambda, cfg.mu_star, KernelSpec::shifted_pareto(cfg.alpha).delta()}, cfg.h);
  for (std::size_t i = 0; i < paths; ++i) {
    auto p = simulate_Y(scheme, make_seed(cfg.master_seed, i));
    simulate_X(p);
    std::ostringstream name;
    name << "limit_" << std::setw(5) << std::setfill('0') << i << ".csv";
    auto os = open_out(cfg.output_dir, name.str());
    write_limit_csv(os, p);
    std::cout << "path " << i << ": X(1) = " << p.X.back() << ", clip fraction " << p.clip_fraction
              << '\n';
  }
  return 0;
}

int converge(const StudyConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const auto rep = run_convergence_study(cfg, [&](const std::string& what) {
    std::cerr << std::fixed << std::setprecision(1) << "[" << elapsed() << "s] " << what << '\n';
  });
  rep.write(cfg.output_dir);
  for (const auto& g : rep.gates) {
    std::cout << "gate " << g.id << " " << (g.passed ? "PASS" : "FAIL") << "  " << g.name << ": "
              << g.detail << '\n';
  }
  std::cerr << "total " << std::fixed << std::setprecision(1) << elapsed() << "s, report in "
            << cfg.output_dir << '\n';
  return verdict(rep.all_passed());
}

int mlf(double kappa, double beta, const std::vector<double>& xs) {
  std::cout << std::setprecision(17);
  for (double x : xs) {
    const auto s = ml_series({kappa, beta}, x);
    std::cout << "E_{" << kappa << "," << beta << "}(" << x << ") = " << s.value
              << "  bound " << s.relative_bound() << "  terms " << s.terms << '\n';
  }
  // Identity gates: E_{1,1}(x) = exp(x), E_{2,1}(x^2) = cosh(x).
  double worst_exp = 0.0, worst_cosh = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = -10.0 + 0.1 * i;
    worst_exp = std::max(worst_exp, std::abs(ml_eval({1.0, 1.0}, x) / std::exp(x) - 1.0));
    const double y = -5.0 + 0.05 * i;
    worst_cosh = std::max(worst_cosh, std::abs(ml_eval({2.0, 1.0}, y * y) / std::cosh(y) - 1.0));
  }
  std::cout << std::setprecision(3) << "max relative error vs exp on [-10, 10]: " << worst_exp
            << "\nmax relative error vs cosh on [-5, 5]: " << worst_cosh << '\n';
  return verdict(worst_exp < 1e-12 && worst_cosh < 1e-12);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearly unstable heavy-tailed Hawkes processes and their rough scaling limit"};
  app.require_subcommand(1);
  Common common;

  auto* kc = app.add_subcommand("kernel-check", "kernel normalization, expansion and Laplace gates");
  auto* ma = app.add_subcommand("malthus", "b_n table and the n b_n limit");
  auto* re = app.add_subcommand("renewal", "resolvent mass and F^n against the limit kernel");
  bool write_grid = false;
  re->add_flag("--write-grid", write_grid, "write the resolvent grids as CSV to --out");

  auto* sh = app.add_subcommand("simulate-hawkes", "simulate event paths to CSV");
  std::int64_t n = 100;
  std::size_t paths = 1;
  std::string method = "cluster";
  double horizon = 1.0;
  bool poisson = false;
  sh->add_option("-n,--n", n, "scale parameter")->check(CLI::PositiveNumber);
  sh->add_option("--paths", paths, "number of paths");
  sh->add_option("--method", method, "thinning or cluster")
      ->check(CLI::IsMember({"thinning", "cluster"}));
  sh->add_option("--horizon", horizon, "horizon as a multiple of n")->check(CLI::PositiveNumber);
  sh->add_flag("--poisson", poisson, "switch the excitation off");

  auto* sl = app.add_subcommand("simulate-limit", "simulate limit paths (t, Y, X) to CSV");
  std::size_t limit_paths = 1;
  sl->add_option("--paths", limit_paths, "number of paths");

  auto* cv = app.add_subcommand("converge", "full convergence study with every gate");

  auto* ml = app.add_subcommand("mlf", "evaluate Mittag-Leffler functions and identity gates");
  double kappa = 1.0, beta = 1.0;
  std::vector<double> xs;
  ml->add_option("--kappa", kappa, "first index")->check(CLI::PositiveNumber);
  ml->add_option("--beta", beta, "second index")->check(CLI::PositiveNumber);
  ml->add_option("--x", xs, "arguments");

  for (auto* sub : {kc, ma, re, sh, sl, cv, ml}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = common.load();
    if (kc->parsed()) return kernel_check(cfg);
    if (ma->parsed()) return malthus(cfg);
    if (re->parsed()) return renewal(cfg, write_grid);
    if (sh->parsed()) {
      if (poisson) cfg.excitation = false;
      return simulate_hawkes(cfg, n, paths, method, horizon);
    }
    if (sl->parsed()) return simulate_limit(cfg, limit_paths);
    if (cv->parsed()) return converge(cfg);
    if (ml->parsed()) return mlf(kappa, beta, xs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
