#include "roughhawkes/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/mlf.hpp"
#include "roughhawkes/renewal.hpp"

namespace roughhawkes {

namespace {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config parsing

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw DomainError("config: cannot parse value '" + text + "' for key '" + key + "'");
  }
  return value;
}

std::vector<std::int64_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::int64_t>(key, trim(item)));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw DomainError("config: key '" + key + "' expects true or false");
}

std::string join(const std::vector<std::int64_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void require_increasing(const std::vector<std::int64_t>& xs, const char* what, std::size_t min) {
  if (xs.size() < min) {
    throw DomainError(std::string("config: ") + what + " needs at least " + std::to_string(min) +
                      " entries");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 1 || (i > 0 && xs[i] <= xs[i - 1])) {
      throw DomainError(std::string("config: ") + what + " must be positive and increasing");
    }
  }
}

// ---------------------------------------------------------------------------
// Seeds: each experiment owns a master derived from the study seed and a
// fixed label, so adding an experiment never shifts another's streams.

std::uint64_t experiment_master(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return path_seed(master, h);
}

template <class R>
std::vector<R> collect(std::vector<Outcome<R>>&& outcomes, std::size_t* failures,
                       const std::string& what) {
  std::vector<R> out;
  out.reserve(outcomes.size());
  std::size_t failed = 0;
  for (auto& o : outcomes) {
    if (o.error) {
      try {
        std::rethrow_exception(o.error);
      } catch (const BudgetExceeded&) {
        ++failed;
        continue;
      }
    }
    out.push_back(std::move(*o.value));
  }
  // Budget failures are excluded only while they stay under 1% of paths.
  if (failed * 100 >= outcomes.size() && failed > 0) {
    throw Error(what + ": " + std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                " paths exceeded the event budget; study aborted");
  }
  if (failures) *failures = failed;
  return out;
}

ScalingScheme study_scheme(const StudyConfig& cfg, std::int64_t n) {
  auto s = make_scheme(cfg.alpha, cfg.lambda, cfg.mu_star, n);
  return cfg.excitation ? s : s.without_excitation();
}

void guard_budget(const ScalingScheme& s) {
  const double expected = expected_count_bound(s) * s.count_scale();
  if (s.excitation && expected > 0.5 * static_cast<double>(kDefaultEventBudget)) {
    std::ostringstream os;
    os << "n=" << s.n << ": expected events per path up to " << expected
       << " is too close to the event budget " << kDefaultEventBudget;
    throw Error(os.str());
  }
}

// ---------------------------------------------------------------------------
// Hawkes ensembles

struct PathRecord {
  std::vector<double> X;
  std::vector<double> Mbar_probe;
  double sup_gap = 0.0;
  double events = 0.0;
};

struct EnsembleData {
  EnsembleSummary summary;
  std::vector<double> X1;
  PathRecord first;
};

PathRecord simulate_record(const ScalingScheme& scheme, std::uint64_t master, std::size_t i,
                           const std::vector<double>& grid, const std::vector<std::size_t>& probes) {
  const auto ev = simulate_cluster(scheme, static_cast<double>(scheme.n), make_seed(master, i));
  const auto rp = rescale(ev, grid);
  PathRecord r;
  r.X = rp.X;
  for (auto k : probes) r.Mbar_probe.push_back(rp.Mbar[k]);
  r.sup_gap = rp.sup_squared_gap();
  r.events = static_cast<double>(ev.times.size());
  return r;
}

std::uint64_t ensemble_master(const StudyConfig& cfg, std::int64_t n) {
  return experiment_master(cfg.master_seed, "ensemble/" + std::to_string(n));
}

EnsembleData run_ensemble(const StudyConfig& cfg, std::int64_t n, const std::vector<double>& grid,
                          const std::vector<std::size_t>& probes, unsigned threads) {
  const auto scheme = study_scheme(cfg, n);
  guard_budget(scheme);
  const auto master = ensemble_master(cfg, n);
  auto one = [&](std::size_t i) { return simulate_record(scheme, master, i, grid, probes); };
  EnsembleData d;
  auto& s = d.summary;
  auto records = collect(parallel_map<PathRecord>(cfg.paths, threads, one), &s.failed_paths,
                         "ensemble n=" + std::to_string(n));
  d.first = records.front();

  s.n = n;
  s.a_n = scheme.a_n;
  s.mu_n = scheme.mu_n;
  s.b_n = scheme.b_n;
  s.paths = records.size();
  std::vector<double> events, gaps;
  std::vector<std::vector<double>> quartiles;
  const std::size_t G = grid.size() - 1;
  const std::vector<std::size_t> qidx{G / 4, G / 2, 3 * G / 4, G};
  std::vector<double> qgrid;
  for (auto k : qidx) qgrid.push_back(grid[k]);
  std::vector<std::vector<double>> probe_cols(probes.size());
  for (const auto& r : records) {
    events.push_back(r.events);
    gaps.push_back(r.sup_gap);
    d.X1.push_back(r.X.back());
    std::vector<double> q;
    for (auto k : qidx) q.push_back(r.X[k]);
    quartiles.push_back(std::move(q));
    for (std::size_t p = 0; p < probes.size(); ++p) probe_cols[p].push_back(r.Mbar_probe[p]);
  }
  s.events = mean_estimate(events);
  s.sup_gap = mean_estimate(gaps);
  s.X1 = mean_estimate(d.X1);
  s.sup_gap_bound = 4.0 * s.X1.mean / scheme.count_scale();
  s.X_moments = moment_table(quartiles, qgrid);
  for (const auto& col : probe_cols) s.Mbar_means.push_back(mean_estimate(col));
  return d;
}

// ---------------------------------------------------------------------------
// Limit ensemble

struct LimitRecord {
  double Y[3];
  double X1;
  double clip;
};

struct LimitData {
  LimitSummary summary;
  std::vector<double> X1;
  LimitPath first;
};

LimitData run_limit(const StudyConfig& cfg, const LimitParams& params, unsigned threads) {
  const auto scheme = make_limit_scheme(params, cfg.h);
  const auto master = experiment_master(cfg.master_seed, "limit");
  const std::size_t M = scheme.steps;
  const std::size_t idx[3] = {M / 4, M / 2, M};
  auto one = [&](std::size_t i) {
    auto p = simulate_Y(scheme, make_seed(master, i));
    simulate_X(p);
    return LimitRecord{{p.Y[idx[0]], p.Y[idx[1]], p.Y[idx[2]]}, p.X.back(), p.clip_fraction};
  };
  auto records = collect(parallel_map<LimitRecord>(cfg.limit_paths, threads, one), nullptr, "limit");

  LimitData d;
  auto& s = d.summary;
  s.paths = records.size();
  s.h = scheme.h;
  const auto lk = LimitKernel{params.alpha, params.lambda, params.effective_delta()};
  for (int j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& r : records) col.push_back(r.Y[j]);
    s.times.push_back(static_cast<double>(idx[j]) * scheme.h);
    s.Y_means.push_back(mean_estimate(col));
    s.Y_targets.push_back(params.mu_star * params.effective_delta() *
                          limit_kernel_F(lk, s.times.back()));
  }
  for (const auto& r : records) {
    d.X1.push_back(r.X1);
    s.clip_fraction_mean += r.clip / static_cast<double>(records.size());
    s.clip_fraction_max = std::max(s.clip_fraction_max, r.clip);
  }
  s.X1 = mean_estimate(d.X1);
  s.X1_target = deterministic_mean_X(params, 1.0);
  for (std::size_t k = 0; k < M; ++k) s.X1_discrete_target += scheme.h * scheme.skeleton[k];

  d.first = simulate_Y(scheme, make_seed(master, 0));
  simulate_X(d.first);
  // Diagnostic only; coarse steps leave too few points for the fit (NaN -> null).
  if (d.first.t.size() >= kMinRoughnessPoints) {
    s.roughness_Y = roughness_estimate(d.first.Y, d.first.t).exponent;
    s.roughness_X = roughness_estimate(d.first.X, d.first.t).exponent;
  } else {
    s.roughness_Y = s.roughness_X = std::numeric_limits<double>::quiet_NaN();
  }

  // Coupled refinement: a step h/2 run and the step h run driven by the
  // pairwise sums of its increments.
  const auto fine = make_limit_scheme(params, 0.5 * scheme.h);
  const auto cmaster = experiment_master(cfg.master_seed, "limit/coupled");
  auto pair = [&](std::size_t i) {
    Rng rng(make_seed(cmaster, i).stream);
    std::vector<double> noise(fine.steps);
    rng.fill_normal(noise);
    const double sd = std::sqrt(fine.h);
    for (double& z : noise) z *= sd;
    const auto coarse_noise = coarsen_noise(noise);
    const double yf = simulate_Y(fine, std::span<const double>(noise)).Y.back();
    const double yc = simulate_Y(scheme, std::span<const double>(coarse_noise)).Y.back();
    return std::pair{yf - yc, yc};
  };
  auto pairs = collect(parallel_map<std::pair<double, double>>(cfg.coupled_paths, threads, pair),
                       nullptr, "coupled limit");
  std::vector<double> diffs, coarse;
  for (const auto& [df, yc] : pairs) {
    diffs.push_back(df);
    coarse.push_back(yc);
  }
  if (!diffs.empty()) {
    s.coupled_Y1_diff = mean_estimate(diffs);
    const double base = mean_estimate(coarse).mean;
    s.coupled_relative_diff = base != 0.0 ? std::abs(s.coupled_Y1_diff.mean) / base : 0.0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Simulator agreement and first-moment oracle

AgreementCheck run_agreement(const StudyConfig& cfg, unsigned threads) {
  const auto scheme = study_scheme(cfg, cfg.agreement_n);
  const double T = static_cast<double>(cfg.agreement_n);
  AgreementCheck a;
  a.n = cfg.agreement_n;
  a.horizons = {0.25 * T, 0.5 * T, T};
  auto counts = [&](const EventSequence& ev) {
    std::vector<double> c;
    for (double h : a.horizons) c.push_back(static_cast<double>(ev.count_until(h)));
    return c;
  };
  const auto tm = experiment_master(cfg.master_seed, "agreement/thinning");
  const auto cm = experiment_master(cfg.master_seed, "agreement/cluster");
  auto thin = collect(parallel_map<std::vector<double>>(
                          cfg.agreement_paths, threads,
                          [&](std::size_t i) {
                            return counts(simulate_thinning(scheme, T, make_seed(tm, i)));
                          }),
                      nullptr, "thinning");
  auto clus = collect(parallel_map<std::vector<double>>(
                          cfg.agreement_paths, threads,
                          [&](std::size_t i) {
                            return counts(simulate_cluster(scheme, T, make_seed(cm, i)));
                          }),
                      nullptr, "cluster");
  a.paths = std::min(thin.size(), clus.size());
  for (std::size_t j = 0; j < a.horizons.size(); ++j) {
    std::vector<double> x, y;
    for (const auto& c : thin) x.push_back(c[j]);
    for (const auto& c : clus) y.push_back(c[j]);
    a.ks.push_back(ks_two_sample(x, y));
    if (j + 1 == a.horizons.size()) {
      a.thinning_mean = mean_estimate(x);
      a.cluster_mean = mean_estimate(y);
    }
  }
  return a;
}

std::vector<FirstMomentRow> run_first_moment(const StudyConfig& cfg, unsigned threads) {
  const auto scheme = study_scheme(cfg, cfg.moment_n);
  guard_budget(scheme);
  const double T = static_cast<double>(cfg.moment_n);
  const std::vector<double> ts{0.5, 1.0};
  const auto master = experiment_master(cfg.master_seed, "first-moment");
  auto paths = collect(parallel_map<std::vector<double>>(
                           cfg.moment_paths, threads,
                           [&](std::size_t i) {
                             const auto ev = simulate_cluster(scheme, T, make_seed(master, i));
                             std::vector<double> c;
                             for (double t : ts) c.push_back(static_cast<double>(ev.count_until(t * T)));
                             return c;
                           }),
                       nullptr, "first moment");
  const auto grid = resolvent_grid(scheme, cfg.moment_dt, T);
  std::vector<FirstMomentRow> rows;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    std::vector<double> col;
    for (const auto& p : paths) col.push_back(p[j]);
    FirstMomentRow r;
    r.t = ts[j];
    r.count = mean_estimate(col);
    r.expected = expected_count(grid, ts[j] * T);
    r.z_score = r.count.se > 0.0 ? (r.count.mean - r.expected) / r.count.se : 0.0;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Gates

GateResult gate(int id, std::string name, bool passed, std::string detail) {
  return {id, std::move(name), passed, std::move(detail)};
}

bool within_sigma(const Estimate& e, double target) {
  return std::abs(e.mean - target) <= kSigmaGate * e.se;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON

Json est_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"count", e.count}}; }

Json ks_json(const KsResult& k) {
  return {{"statistic", k.statistic}, {"p_value", k.p_value}, {"n_a", k.n_a}, {"n_b", k.n_b}};
}

Json config_json(const StudyConfig& c) {
  return {{"alpha", c.alpha},
          {"lambda", c.lambda},
          {"mu_star", c.mu_star},
          {"n_list", c.n_list},
          {"paths", c.paths},
          {"grid", c.grid},
          {"h", c.h},
          {"master_seed", c.master_seed},
          {"excitation", c.excitation},
          {"limit_paths", c.limit_paths},
          {"coupled_paths", c.coupled_paths},
          {"agreement_n", c.agreement_n},
          {"agreement_paths", c.agreement_paths},
          {"moment_n", c.moment_n},
          {"moment_paths", c.moment_paths},
          {"moment_dt", c.moment_dt},
          {"mass_n", c.mass_n},
          {"mass_dt", c.mass_dt},
          {"mass_horizon_factor", c.mass_horizon_factor},
          {"klp_n", c.klp_n},
          {"klp_dt", c.klp_dt},
          {"malthus_n", c.malthus_n}};
}

}  // namespace

// ---------------------------------------------------------------------------

void StudyConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("config: alpha must lie in (0, 1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("config: lambda must be > 0");
  if (!(mu_star > 0.0) || !std::isfinite(mu_star)) throw DomainError("config: mu_star must be > 0");
  require_increasing(n_list, "n_list", 1);
  require_increasing(klp_n, "klp_n", 2);
  require_increasing(malthus_n, "malthus_n", 2);
  if (paths < 100) throw DomainError("config: paths must be >= 100 for the statistical gates");
  if (limit_paths < 100) throw DomainError("config: limit_paths must be >= 100");
  if (agreement_paths < 100 || moment_paths < 100) {
    throw DomainError("config: agreement_paths and moment_paths must be >= 100");
  }
  if (grid < 4 || grid % 4 != 0) throw DomainError("config: grid must be a positive multiple of 4");
  const double steps = std::round(1.0 / h);
  if (!(h > 0.0 && h <= 0.25) || std::abs(steps * h - 1.0) > 1e-12 ||
      static_cast<std::int64_t>(steps) % 4 != 0) {
    throw DomainError("config: h must be 1/m with m a multiple of 4");
  }
  if (agreement_n < 1 || moment_n < 1 || mass_n < 1) throw DomainError("config: n must be >= 1");
  if (!(moment_dt > 0.0) || !(mass_dt > 0.0) || !(klp_dt > 0.0) || !(mass_horizon_factor > 0.0)) {
    throw DomainError("config: grid steps must be positive");
  }
  if (alpha <= 0.5) warn("config: alpha <= 1/2 lies outside the regime covered by the limit theorem");
}

unsigned StudyConfig::resolved_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

StudyConfig parse_config(std::istream& in) {
  StudyConfig c;
  std::string line;
  int lineno = 0;
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
      {"alpha", [&](auto& k, auto& v) { c.alpha = parse_number<double>(k, v); }},
      {"lambda", [&](auto& k, auto& v) { c.lambda = parse_number<double>(k, v); }},
      {"mu_star", [&](auto& k, auto& v) { c.mu_star = parse_number<double>(k, v); }},
      {"n_list", [&](auto& k, auto& v) { c.n_list = parse_list(k, v); }},
      {"paths", [&](auto& k, auto& v) { c.paths = parse_number<std::size_t>(k, v); }},
      {"grid", [&](auto& k, auto& v) { c.grid = parse_number<std::size_t>(k, v); }},
      {"h", [&](auto& k, auto& v) { c.h = parse_number<double>(k, v); }},
      {"master_seed", [&](auto& k, auto& v) { c.master_seed = parse_number<std::uint64_t>(k, v); }},
      {"output_dir", [&](auto&, auto& v) { c.output_dir = v; }},
      {"threads", [&](auto& k, auto& v) { c.threads = parse_number<unsigned>(k, v); }},
      {"excitation", [&](auto& k, auto& v) { c.excitation = parse_bool(k, v); }},
      {"limit_paths", [&](auto& k, auto& v) { c.limit_paths = parse_number<std::size_t>(k, v); }},
      {"coupled_paths", [&](auto& k, auto& v) { c.coupled_paths = parse_number<std::size_t>(k, v); }},
      {"agreement_n", [&](auto& k, auto& v) { c.agreement_n = parse_number<std::int64_t>(k, v); }},
      {"agreement_paths",
       [&](auto& k, auto& v) { c.agreement_paths = parse_number<std::size_t>(k, v); }},
      {"moment_n", [&](auto& k, auto& v) { c.moment_n = parse_number<std::int64_t>(k, v); }},
      {"moment_paths", [&](auto& k, auto& v) { c.moment_paths = parse_number<std::size_t>(k, v); }},
      {"moment_dt", [&](auto& k, auto& v) { c.moment_dt = parse_number<double>(k, v); }},
      {"mass_n", [&](auto& k, auto& v) { c.mass_n = parse_number<std::int64_t>(k, v); }},
      {"mass_dt", [&](auto& k, auto& v) { c.mass_dt = parse_number<double>(k, v); }},
      {"mass_horizon_factor",
       [&](auto& k, auto& v) { c.mass_horizon_factor = parse_number<double>(k, v); }},
      {"klp_n", [&](auto& k, auto& v) { c.klp_n = parse_list(k, v); }},
      {"klp_dt", [&](auto& k, auto& v) { c.klp_dt = parse_number<double>(k, v); }},
      {"malthus_n", [&](auto& k, auto& v) { c.malthus_n = parse_list(k, v); }},
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open config file " + file.string());
  return parse_config(in);
}

std::string to_config_text(const StudyConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "alpha = " << c.alpha << '\n'
     << "lambda = " << c.lambda << '\n'
     << "mu_star = " << c.mu_star << '\n'
     << "n_list = " << join(c.n_list) << '\n'
     << "paths = " << c.paths << '\n'
     << "grid = " << c.grid << '\n'
     << "h = " << c.h << '\n'
     << "master_seed = " << c.master_seed << '\n'
     << "output_dir = " << c.output_dir << '\n'
     << "threads = " << c.threads << '\n'
     << "excitation = " << (c.excitation ? "true" : "false") << '\n'
     << "limit_paths = " << c.limit_paths << '\n'
     << "coupled_paths = " << c.coupled_paths << '\n'
     << "agreement_n = " << c.agreement_n << '\n'
     << "agreement_paths = " << c.agreement_paths << '\n'
     << "moment_n = " << c.moment_n << '\n'
     << "moment_paths = " << c.moment_paths << '\n'
     << "moment_dt = " << c.moment_dt << '\n'
     << "mass_n = " << c.mass_n << '\n'
     << "mass_dt = " << c.mass_dt << '\n'
     << "mass_horizon_factor = " << c.mass_horizon_factor << '\n'
     << "klp_n = " << join(c.klp_n) << '\n'
     << "klp_dt = " << c.klp_dt << '\n'
     << "malthus_n = " << join(c.malthus_n) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Deterministic checks

std::vector<LaplaceRow> laplace_identity_rows() {
  const std::pair<double, double> cases[] = {{0.6, 0.3}, {0.75, 0.5}, {0.9, 1.0}};
  // z^alpha / lambda on a geometric ladder above the abscissa.
  const double ratios[] = {1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0};
  std::vector<LaplaceRow> rows;
  for (const auto& [alpha, lambda] : cases) {
    const LimitKernel lk{alpha, lambda, std::tgamma(1.0 - alpha)};
    for (double r : ratios) {
      const double z = std::pow(r * lambda, 1.0 / alpha);
      rows.push_back({alpha, lambda, z, laplace_check_f(lk, z)});
    }
  }
  return rows;
}

std::vector<KernelExpansionRow> kernel_expansion_rows(const KernelSpec& kernel) {
  std::vector<KernelExpansionRow> rows;
  const double delta = kernel.delta();
  for (double z : {1e-3, 1e-4, 1e-5, 1e-6}) {
    KernelExpansionRow r;
    r.z = z;
    r.one_minus_laplace = 1.0 - kernel_laplace(kernel, z);
    r.ratio = r.one_minus_laplace / std::pow(z, kernel.alpha);
    r.abs_error = std::abs(r.ratio - delta);
    r.relative_error = r.abs_error / delta;
    rows.push_back(r);
  }
  return rows;
}

std::vector<MalthusRow> malthus_table(double alpha, double lambda,
                                      const std::vector<std::int64_t>& ns) {
  std::vector<MalthusRow> rows;
  const double limit = malthus_limit(alpha, lambda);
  for (auto n : ns) {
    const auto s = make_scheme(alpha, lambda, 1.0, n);
    MalthusRow r;
    r.n = n;
    r.a_n = s.a_n;
    r.b_n = s.b_n;
    r.n_b_n = static_cast<double>(n) * s.b_n;
    r.limit = limit;
    r.relative_error = std::abs(r.n_b_n - limit) / limit;
    r.residual = s.malthus_residual;
    rows.push_back(r);
  }
  return rows;
}

MassCheck resolvent_mass_check(const ScalingScheme& scheme, double dt, double horizon_factor) {
  MassCheck m;
  m.n = scheme.n;
  m.dt = dt;
  m.horizon = horizon_factor / scheme.b_n;
  const auto grid = resolvent_grid(scheme, dt, m.horizon);
  m.total = grid.psi_tilde_total();
  m.target = 1.0 / (scheme.a_n - 1.0);
  m.relative_error = std::abs(m.total - m.target) / m.target;
  return m;
}

double convolution_series_check(const ScalingScheme& scheme, double dt, std::size_t cells,
                                int powers) {
  const auto w = kernel_cell_masses(scheme, dt, cells);
  const auto p = solve_renewal(w);
  std::vector<double> term(w), sum(w);
  for (int k = 2; k <= powers; ++k) {
    std::vector<double> next(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
      for (std::size_t j = 0; j <= i; ++j) next[i] += w[j] * term[i - j];
    }
    term = std::move(next);
    for (std::size_t i = 0; i < cells; ++i) sum[i] += term[i];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < cells; ++i) worst = std::max(worst, std::abs(sum[i] - p[i]));
  return worst;
}

std::vector<KlpRow> klp_table(double alpha, double lambda, const std::vector<std::int64_t>& ns,
                              double dt) {
  std::vector<KlpRow> rows;
  for (auto n : ns) {
    const auto s = make_scheme(alpha, lambda, 1.0, n);
    const auto grid = resolvent_grid(s, dt, static_cast<double>(n));
    rows.push_back({n, dt, sup_distance_to_limit(grid)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

ConvergenceReport run_convergence_study(const StudyConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  auto note = [&](const std::string& what) {
    if (progress) progress(what);
  };
  const unsigned threads = cfg.resolved_threads();
  const auto kernel = KernelSpec::shifted_pareto(cfg.alpha);
  const auto lparams = LimitParams{cfg.alpha, cfg.lambda, cfg.mu_star, kernel.delta()};

  ConvergenceReport rep;
  rep.config = cfg;

  note("laplace identity");
  rep.laplace = laplace_identity_rows();
  note("kernel expansion");
  rep.kernel_expansion = kernel_expansion_rows(kernel);
  note("malthus table");
  rep.malthus = malthus_table(cfg.alpha, cfg.lambda, cfg.malthus_n);
  note("resolvent mass");
  const auto mass_scheme = make_scheme(cfg.alpha, cfg.lambda, cfg.mu_star, cfg.mass_n);
  rep.mass = resolvent_mass_check(mass_scheme, cfg.mass_dt, cfg.mass_horizon_factor);
  rep.mass.brute_force_max_diff = convolution_series_check(mass_scheme, 0.01, 64, 40);
  note("resolvent vs limit kernel");
  rep.klp = klp_table(cfg.alpha, cfg.lambda, cfg.klp_n, cfg.klp_dt);
  note("simulator agreement");
  rep.agreement = run_agreement(cfg, threads);
  note("first moment");
  rep.first_moment = run_first_moment(cfg, threads);
  note("limit ensemble");
  auto limit = run_limit(cfg, lparams, threads);
  rep.limit = limit.summary;

  const auto grid = uniform_grid(cfg.grid);
  const std::vector<std::size_t> probes{cfg.grid / 4, cfg.grid / 2, cfg.grid};
  std::vector<EnsembleData> ensembles;
  for (auto n : cfg.n_list) {
    note("ensemble n=" + std::to_string(n));
    ensembles.push_back(run_ensemble(cfg, n, grid, probes, threads));
    auto& s = ensembles.back().summary;
    s.mean_error = std::abs(s.X1.mean - rep.limit.X1_target);
    s.ks_vs_limit = ks_two_sample(ensembles.back().X1, limit.X1);
    rep.ensembles.push_back(s);
  }

  // ---- gates
  {
    double worst = 0.0;
    for (const auto& r : rep.laplace) worst = std::max(worst, r.residual);
    rep.gates.push_back(gate(1, "laplace identity", worst < 1e-6,
                             "max residual " + fmt(worst) + " (tol 1e-06)"));
  }
  {
    std::vector<double> errs;
    for (const auto& r : rep.kernel_expansion) errs.push_back(r.abs_error);
    const double last = rep.kernel_expansion.back().relative_error;
    const bool dec = strictly_decreasing(errs);
    rep.gates.push_back(gate(2, "kernel expansion", dec && last < 0.005,
                             std::string("decreasing ") + (dec ? "yes" : "no") +
                                 ", relative error at z=1e-6 " + fmt(last) + " (tol 0.005)"));
  }
  {
    double worst = 0.0;
    for (const auto& r : rep.malthus) worst = std::max(worst, r.residual);
    const double first = rep.malthus.front().relative_error;
    const double last = rep.malthus.back().relative_error;
    rep.gates.push_back(gate(3, "malthusian limit", last < first && worst < 1e-12,
                             "relative error " + fmt(first) + " -> " + fmt(last) +
                                 ", max residual " + fmt(worst) + " (tol 1e-12)"));
  }
  rep.gates.push_back(gate(4, "resolvent mass",
                           rep.mass.relative_error < 0.02 && rep.mass.brute_force_max_diff < 1e-10,
                           "mass relative error " + fmt(rep.mass.relative_error) +
                               " (tol 0.02), convolution series diff " +
                               fmt(rep.mass.brute_force_max_diff) + " (tol 1e-10)"));
  {
    std::vector<double> d;
    std::string detail = "sup distances";
    for (const auto& r : rep.klp) {
      d.push_back(r.sup_distance);
      detail += " " + fmt(r.sup_distance);
    }
    rep.gates.push_back(gate(5, "resolvent converges to limit kernel", strictly_decreasing(d), detail));
  }
  {
    const auto& ks = rep.agreement.ks.back();
    rep.gates.push_back(gate(6, "thinning vs cluster", ks.p_value > kKsLevel,
                             "KS p-value " + fmt(ks.p_value) + " (level 0.01)"));
  }
  {
    bool ok = true;
    std::string detail = "z-scores";
    for (const auto& r : rep.first_moment) {
      ok = ok && within_sigma(r.count, r.expected);
      detail += " " + fmt(r.z_score);
    }
    rep.gates.push_back(gate(7, "first moment", ok, detail + " (|z| <= 3)"));
  }
  {
    std::vector<double> g;
    std::string detail = "E sup (X-Lambda)^2";
    for (const auto& s : rep.ensembles) {
      g.push_back(s.sup_gap.mean);
      detail += " " + fmt(s.sup_gap.mean);
    }
    rep.gates.push_back(gate(8, "martingale vanishing", strictly_decreasing(g), detail));
  }
  {
    bool ok = true;
    std::string detail = "z-scores";
    for (std::size_t j = 0; j < rep.limit.times.size(); ++j) {
      const auto& e = rep.limit.Y_means[j];
      ok = ok && within_sigma(e, rep.limit.Y_targets[j]);
      detail += " " + fmt(e.se > 0 ? (e.mean - rep.limit.Y_targets[j]) / e.se : 0.0);
    }
    rep.gates.push_back(gate(9, "limit scheme mean", ok, detail + " (|z| <= 3)"));
  }
  {
    std::vector<double> err, ks;
    std::string detail = "mean error";
    for (const auto& s : rep.ensembles) {
      err.push_back(s.mean_error);
      detail += " " + fmt(s.mean_error);
    }
    detail += "; KS";
    for (const auto& s : rep.ensembles) {
      ks.push_back(s.ks_vs_limit.statistic);
      detail += " " + fmt(s.ks_vs_limit.statistic);
    }
    const bool a = strictly_decreasing(err), b = strictly_decreasing(ks);
    rep.gates.push_back(gate(10, "scaling limit", a && b,
                             detail + std::string(" (a: ") + (a ? "pass" : "fail") +
                                 ", b: " + (b ? "pass" : "fail") + ")"));
  }
  {
    // Replays path 0 of every experiment and compares bit for bit.
    note("determinism replay");
    bool ok = true;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      const auto n = cfg.n_list[i];
      const auto again = simulate_record(study_scheme(cfg, n), ensemble_master(cfg, n), 0, grid, probes);
      ok = ok && bitwise_equal(again.X, ensembles[i].first.X);
    }
    auto lp = simulate_Y(lparams, cfg.h, make_seed(experiment_master(cfg.master_seed, "limit"), 0));
    ok = ok && bitwise_equal(lp.Y, limit.first.Y);
    rep.gates.push_back(gate(11, "determinism", ok,
                             "replay of path 0 per experiment is bit-identical: " +
                                 std::string(ok ? "yes" : "no")));
  }
  return rep;
}

bool ConvergenceReport::all_passed() const {
  return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.passed; });
}

std::string ConvergenceReport::to_json() const {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_json(config);
  j["gate_sigma"] = kSigmaGate;

  Json lap = Json::array();
  for (const auto& r : laplace) {
    lap.push_back({{"alpha", r.alpha}, {"lambda", r.lambda}, {"z", r.z}, {"residual", r.residual}});
  }
  j["laplace_identity"] = lap;

  Json ke = Json::array();
  for (const auto& r : kernel_expansion) {
    ke.push_back({{"z", r.z},
                  {"one_minus_laplace", r.one_minus_laplace},
                  {"ratio", r.ratio},
                  {"abs_error", r.abs_error},
                  {"relative_error", r.relative_error}});
  }
  j["kernel_expansion"] = ke;

  Json mt = Json::array();
  for (const auto& r : malthus) {
    mt.push_back({{"n", r.n},
                  {"a_n", r.a_n},
                  {"b_n", r.b_n},
                  {"n_b_n", r.n_b_n},
                  {"limit", r.limit},
                  {"relative_error", r.relative_error},
                  {"residual", r.residual}});
  }
  j["malthus"] = mt;

  j["resolvent_mass"] = {{"n", mass.n},
                         {"dt", mass.dt},
                         {"horizon", mass.horizon},
                         {"total", mass.total},
                         {"target", mass.target},
                         {"relative_error", mass.relative_error},
                         {"convolution_series_max_diff", mass.brute_force_max_diff}};

  Json kl = Json::array();
  for (const auto& r : klp) kl.push_back({{"n", r.n}, {"dt", r.dt}, {"sup_distance", r.sup_distance}});
  j["resolvent_vs_limit"] = kl;

  Json ag;
  ag["n"] = agreement.n;
  ag["paths"] = agreement.paths;
  ag["thinning_mean"] = est_json(agreement.thinning_mean);
  ag["cluster_mean"] = est_json(agreement.cluster_mean);
  Json ks = Json::array();
  for (std::size_t i = 0; i < agreement.ks.size(); ++i) {
    auto e = ks_json(agreement.ks[i]);
    e["horizon"] = agreement.horizons[i];
    ks.push_back(e);
  }
  ag["ks_counts"] = ks;
  j["simulator_agreement"] = ag;

  Json fm = Json::array();
  for (const auto& r : first_moment) {
    fm.push_back({{"t", r.t},
                  {"count", est_json(r.count)},
                  {"expected", r.expected},
                  {"z_score", r.z_score}});
  }
  j["first_moment"] = {{"n", config.moment_n}, {"rows", fm}};

  Json lim;
  lim["paths"] = limit.paths;
  lim["h"] = limit.h;
  Json ym = Json::array();
  for (std::size_t i = 0; i < limit.times.size(); ++i) {
    ym.push_back({{"t", limit.times[i]},
                  {"Y", est_json(limit.Y_means[i])},
                  {"target", limit.Y_targets[i]}});
  }
  lim["Y_means"] = ym;
  lim["X1"] = est_json(limit.X1);
  lim["X1_target"] = limit.X1_target;
  lim["X1_discrete_target"] = limit.X1_discrete_target;
  lim["clip_fraction_mean"] = limit.clip_fraction_mean;
  lim["clip_fraction_max"] = limit.clip_fraction_max;
  lim["roughness_exponent_Y"] = limit.roughness_Y;
  lim["roughness_exponent_X"] = limit.roughness_X;
  lim["coupled_Y1_difference"] = est_json(limit.coupled_Y1_diff);
  lim["coupled_relative_difference"] = limit.coupled_relative_diff;
  j["limit"] = lim;

  Json en = Json::array();
  for (const auto& s : ensembles) {
    Json e;
    e["n"] = s.n;
    e["a_n"] = s.a_n;
    e["mu_n"] = s.mu_n;
    e["b_n"] = s.b_n;
    e["paths"] = s.paths;
    e["failed_paths"] = s.failed_paths;
    e["events"] = est_json(s.events);
    Json mom = Json::array();
    for (const auto& m : s.X_moments) {
      mom.push_back({{"t", m.t},
                     {"mean", m.mean},
                     {"mean_se", m.mean_se},
                     {"variance", m.variance},
                     {"variance_se", m.variance_se},
                     {"count", m.count}});
    }
    e["X_moments"] = mom;
    Json mb = Json::array();
    for (std::size_t i = 0; i < s.Mbar_means.size(); ++i) {
      auto m = est_json(s.Mbar_means[i]);
      m["t"] = i + 1 == s.Mbar_means.size() ? 1.0 : 0.25 * static_cast<double>(i + 1);
      mb.push_back(m);
    }
    e["Mbar_means"] = mb;
    e["sup_squared_gap"] = est_json(s.sup_gap);
    e["sup_squared_gap_bound"] = s.sup_gap_bound;
    e["X1"] = est_json(s.X1);
    e["X1_mean_error"] = s.mean_error;
    e["ks_vs_limit"] = ks_json(s.ks_vs_limit);
    en.push_back(e);
  }
  j["ensembles"] = en;

  Json gs = Json::array();
  for (const auto& g : gates) {
    gs.push_back({{"id", g.id}, {"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
  }
  j["gates"] = gs;
  j["all_passed"] = all_passed();
  return j.dump(2) + "\n";
}

void ConvergenceReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << std::setprecision(17);
    return os;
  };
  {
    auto os = open("report.json");
    os << to_json();
  }
  {
    auto os = open("moments.csv");
    os << "n,t,mean,mean_se,variance,variance_se,count\n";
    for (const auto& s : ensembles) {
      for (const auto& m : s.X_moments) {
        os << s.n << ',' << m.t << ',' << m.mean << ',' << m.mean_se << ',' << m.variance << ','
           << m.variance_se << ',' << m.count << '\n';
      }
    }
  }
  {
    auto os = open("malthus.csv");
    os << "n,a_n,b_n,n_b_n,limit,relative_error,residual\n";
    for (const auto& r : malthus) {
      os << r.n << ',' << r.a_n << ',' << r.b_n << ',' << r.n_b_n << ',' << r.limit << ','
         << r.relative_error << ',' << r.residual << '\n';
    }
  }
  {
    auto os = open("resolvent.csv");
    os << "n,dt,sup_distance\n";
    for (const auto& r : klp) os << r.n << ',' << r.dt << ',' << r.sup_distance << '\n';
  }
  {
    auto os = open("gates.csv");
    os << "id,name,passed\n";
    for (const auto& g : gates) os << g.id << ',' << g.name << ',' << (g.passed ? 1 : 0) << '\n';
  }
}

}  // namespace roughhawkes
