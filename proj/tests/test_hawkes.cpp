#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/hawkes.hpp"
#include "roughhawkes/renewal.hpp"
#include "roughhawkes/stats.hpp"

using namespace roughhawkes;

namespace {
const ScalingScheme kScheme = make_scheme(0.75, 0.5, 1.0, 100);

void expect_valid(const EventSequence& ev) {
  for (std::size_t i = 0; i < ev.times.size(); ++i) {
    ASSERT_GE(ev.times[i], 0.0);
    ASSERT_LE(ev.times[i], ev.horizon);
    if (i > 0) ASSERT_GT(ev.times[i], ev.times[i - 1]);
  }
}
}  // namespace

TEST(Hawkes, SequencesAreOrderedAndInsideHorizon) {
  for (std::uint64_t p = 0; p < 20; ++p) {
    expect_valid(simulate_thinning(kScheme, 100.0, make_seed(1, p)));
    expect_valid(simulate_cluster(kScheme, 100.0, make_seed(2, p)));
  }
}

TEST(Hawkes, SameSeedIsBitExact) {
  const auto a = simulate_thinning(kScheme, 100.0, make_seed(9, 3));
  const auto b = simulate_thinning(kScheme, 100.0, make_seed(9, 3));
  EXPECT_EQ(a.times, b.times);
  const auto c = simulate_cluster(kScheme, 100.0, make_seed(9, 3));
  const auto d = simulate_cluster(kScheme, 100.0, make_seed(9, 3));
  EXPECT_EQ(c.times, d.times);
  EXPECT_NE(a.times, simulate_thinning(kScheme, 100.0, make_seed(9, 4)).times);
}

TEST(Hawkes, PoissonModeCountMean) {
  const auto s = kScheme.without_excitation();
  const double T = 100.0;
  for (int method = 0; method < 2; ++method) {
    std::vector<double> counts;
    for (std::uint64_t p = 0; p < 2000; ++p) {
      const auto ev = method == 0 ? simulate_thinning(s, T, make_seed(5, p))
                                  : simulate_cluster(s, T, make_seed(6, p));
      counts.push_back(static_cast<double>(ev.times.size()));
    }
    const auto e = mean_estimate(counts);
    EXPECT_LE(std::abs(e.mean - s.mu_n * T), 3 * e.se) << "method " << method;
  }
}

TEST(Hawkes, NoImmigrantsMeansNoEvents) {
  auto s = kScheme;
  s.mu_n = 0.0;
  EXPECT_TRUE(simulate_cluster(s, 100.0, make_seed(1, 1)).times.empty());
  EXPECT_TRUE(simulate_thinning(s, 100.0, make_seed(1, 1)).times.empty());
}

TEST(Hawkes, IntensityAtAndAfterAnEvent) {
  EventSequence ev;
  ev.scheme = kScheme;
  ev.horizon = 10.0;
  ev.times = {2.0};
  EXPECT_DOUBLE_EQ(intensity_path(ev, 1.0), kScheme.mu_n);
  EXPECT_DOUBLE_EQ(intensity_path(ev, 2.0), kScheme.mu_n);  // left limit
  EXPECT_NEAR(intensity_path(ev, std::nextafter(2.0, 3.0)), kScheme.mu_n + kScheme.a_n * 0.75, 1e-12);
  EXPECT_THROW(intensity_path(ev, 11.0), DomainError);
}

TEST(Hawkes, ThinningIntensityMatchesFreshSummation) {
  std::vector<std::pair<double, double>> seen;
  ThinningOptions opt;
  opt.observer = [&](double t, double lam) { seen.emplace_back(t, lam); };
  const auto ev = simulate_thinning(kScheme, 100.0, make_seed(77, 0), opt);
  ASSERT_GE(seen.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& [t, lam] = seen[i * (seen.size() / 20)];
    EXPECT_NEAR(intensity_path(ev, t), lam, 1e-10 * lam);
  }
}

TEST(Hawkes, TailCutoffStaysCloseToExactIntensity) {
  ThinningOptions opt;
  opt.tail_cutoff = 1e9;  // never binds on [0, 100]: identical path
  const auto a = simulate_thinning(kScheme, 100.0, make_seed(4, 4));
  const auto b = simulate_thinning(kScheme, 100.0, make_seed(4, 4), opt);
  EXPECT_EQ(a.times, b.times);
}

TEST(Hawkes, CompensatorMatchesTrapezoidIntegration) {
  const auto ev = simulate_cluster(kScheme, 100.0, make_seed(3, 1));
  ASSERT_GT(ev.times.size(), 10u);
  // Integrate between events, where the intensity is smooth and convex.
  std::vector<double> knots{0.0};
  for (double t : ev.times) if (t < 50.0) knots.push_back(t);
  knots.push_back(50.0);
  double integral = 0.0;
  const int m = 2000;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1], h = (b - a) / m;
    if (h == 0.0) continue;
    // Right limits at the left knot: evaluate just inside the interval.
    double s = 0.5 * (intensity_path(ev, std::nextafter(a, b)) + intensity_path(ev, b));
    for (int j = 1; j < m; ++j) s += intensity_path(ev, a + j * h);
    integral += s * h;
  }
  const double exact = compensator(ev, 50.0);
  // Trapezoid error bound: the intensity is convex between events, so the rule
  // overestimates, by at most sum h^2 (b - a) max|lambda''| / 12.
  EXPECT_GE(integral, exact - 1e-9);
  EXPECT_NEAR(integral, exact, 1e-4 * exact);
}

TEST(Hawkes, ClusterOffspringFractionMatchesCdf) {
  // With a short horizon many children fall beyond T; the kept fraction of
  // all children is E over parents of F(T - s), and every parent has mean a_n
  // children in total.
  const double T = 5.0;
  double kept = 0, discarded = 0, parents = 0, expected_kept = 0;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    ClusterDiagnostics d;
    const auto ev = simulate_cluster(kScheme, T, make_seed(8, p), {}, &d);
    kept += d.offspring_kept;
    discarded += d.offspring_discarded;
    parents += ev.times.size();
    for (double s : ev.times) expected_kept += kScheme.a_n * kernel_cdf(kScheme.kernel, T - s);
  }
  const double total = kept + discarded;
  EXPECT_NEAR(total / parents, kScheme.a_n, 3 * std::sqrt(kScheme.a_n / parents));
  EXPECT_NEAR(kept, expected_kept, 3 * std::sqrt(expected_kept));
}

TEST(Hawkes, BudgetIsEnforced) {
  ThinningOptions t;
  t.max_events = 5;
  EXPECT_THROW(simulate_thinning(kScheme, 1000.0, make_seed(1, 0), t), BudgetExceeded);
  ClusterOptions c;
  c.max_events = 5;
  EXPECT_THROW(simulate_cluster(kScheme, 1000.0, make_seed(1, 0), c), BudgetExceeded);
}

TEST(Rescale, EmptyPath) {
  EventSequence ev;
  ev.scheme = kScheme;
  ev.horizon = 100.0;
  const auto g = uniform_grid(8);
  const auto r = rescale(ev, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(r.X[k], 0.0);
    EXPECT_NEAR(r.Lambda[k], kScheme.mu_n * 100.0 * g[k] / kScheme.count_scale(), 1e-15);
    EXPECT_NEAR(r.Mbar[k], -r.n_alpha * r.Lambda[k], 1e-15);
  }
}

TEST(Rescale, FastRouteMatchesDirectSummation) {
  for (std::int64_t n : {100, 1000}) {
    const auto s = make_scheme(0.75, 0.5, 1.0, n);
    const auto ev = simulate_cluster(s, static_cast<double>(n), make_seed(12, n));
    const auto g = uniform_grid(64);
    const auto fast = rescale(ev, g);
    const auto direct = rescale_direct(ev, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_EQ(fast.X[k], direct.X[k]);
      EXPECT_NEAR(fast.Lambda[k], direct.Lambda[k], 1e-12 * (1.0 + direct.Lambda[k]));
    }
  }
}

TEST(Rescale, PathInvariants) {
  const auto ev = simulate_cluster(kScheme, 100.0, make_seed(21, 0));
  const auto g = uniform_grid(256);
  const auto r = rescale(ev, g);
  const double jump = 1.0 / kScheme.count_scale();
  for (std::size_t k = 0; k < g.size(); ++k) {
    // X counts jumps of size n^(-2 alpha).
    const double jumps = r.X[k] / jump;
    EXPECT_NEAR(jumps, std::round(jumps), 1e-9);
    EXPECT_DOUBLE_EQ(r.Mbar[k], r.n_alpha * (r.X[k] - r.Lambda[k]));
    if (k > 0) {
      EXPECT_GE(r.X[k], r.X[k - 1]);
      EXPECT_GT(r.Lambda[k], r.Lambda[k - 1]);
    }
  }
  // [Mbar, Mbar]_t = X_t.
  for (double t : {0.25, 0.5, 1.0}) {
    const auto k = static_cast<std::size_t>(t * 256);
    EXPECT_NEAR(quadratic_variation_Mbar(ev, t), r.X[k], 1e-12);
  }
  EXPECT_THROW(rescale(ev, std::vector<double>{0.0, 2.0}), DomainError);
}

TEST(Rescale, CountMeanMatchesRenewalOracle) {
  const auto grid = resolvent_grid(kScheme, 0.05, 100.0);
  std::vector<double> half, full;
  for (std::uint64_t p = 0; p < 2000; ++p) {
    const auto ev = simulate_cluster(kScheme, 100.0, make_seed(31, p));
    half.push_back(static_cast<double>(ev.count_until(50.0)));
    full.push_back(static_cast<double>(ev.times.size()));
  }
  const auto h = mean_estimate(half), f = mean_estimate(full);
  EXPECT_LE(std::abs(h.mean - expected_count(grid, 50.0)), 3 * h.se);
  EXPECT_LE(std::abs(f.mean - expected_count(grid, 100.0)), 3 * f.se);
}

TEST(Rescale, MartingaleHasMeanZero) {
  const auto g = uniform_grid(4);
  std::vector<std::vector<double>> cols(3);
  for (std::uint64_t p = 0; p < 1000; ++p) {
    const auto r = rescale(simulate_cluster(kScheme, 100.0, make_seed(41, p)), g);
    cols[0].push_back(r.Mbar[1]);
    cols[1].push_back(r.Mbar[2]);
    cols[2].push_back(r.Mbar[4]);
  }
  for (const auto& c : cols) {
    const auto e = mean_estimate(c);
    EXPECT_LE(std::abs(e.mean), 3 * e.se);
  }
}

TEST(Hawkes, CsvExport) {
  const auto ev = simulate_cluster(kScheme, 100.0, make_seed(1, 2));
  std::ostringstream os;
  write_events_csv(os, ev);
  const auto text = os.str();
  EXPECT_NE(text.find("# n=100"), std::string::npos);
  EXPECT_NE(text.find("\ntime\n"), std::string::npos);
  std::ostringstream rs;
  write_rescaled_csv(rs, rescale(ev, uniform_grid(4)));
  EXPECT_EQ(rs.str().substr(0, 15), "t,X,Lambda,Mbar");
}

TEST(Hawkes, ThinningAndClusterAgreeInLaw) {
  const auto s = make_scheme(0.75, 0.5, 1.0, 30);
  const double T = 30.0;
  std::vector<std::vector<double>> a(3), b(3);
  for (std::uint64_t p = 0; p < 1000; ++p) {
    const auto x = simulate_thinning(s, T, make_seed(51, p));
    const auto y = simulate_cluster(s, T, make_seed(52, p));
    for (int j = 0; j < 3; ++j) {
      const double h = T * (j + 1) / 3.0;
      a[j].push_back(static_cast<double>(x.count_until(h)));
      b[j].push_back(static_cast<double>(y.count_until(h)));
    }
  }
  for (int j = 0; j < 3; ++j) EXPECT_GT(ks_two_sample(a[j], b[j]).p_value, 0.01) << j;
}
