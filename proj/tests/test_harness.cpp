#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "roughhawkes/errors.hpp"
#include "roughhawkes/harness.hpp"

using namespace roughhawkes;

namespace {
StudyConfig poisson_config() {
  std::istringstream in(R"(
    # Poisson test mode: the kernel is switched off
    excitation = false
    n_list = 50, 100
    paths = 400
    limit_paths = 100
    coupled_paths = 10
    agreement_n = 20
    agreement_paths = 100
    moment_n = 50
    moment_paths = 100
    klp_n = 100, 200
    malthus_n = 100, 1000
    mass_n = 50
    h = 0.015625
  )");
  return parse_config(in);
}
}  // namespace

TEST(Config, DefaultsMatchTheReferenceStudy) {
  const StudyConfig c;
  EXPECT_EQ(c.alpha, 0.75);
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.mu_star, 1.0);
  EXPECT_EQ(c.n_list, (std::vector<std::int64_t>{200, 1000, 5000}));
  EXPECT_EQ(c.paths, 500u);
  EXPECT_EQ(c.h, 1.0 / 1024);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, TextRoundTrip) {
  auto c = poisson_config();
  c.master_seed = 18446744073709551615ULL;
  c.output_dir = "some/dir";
  std::istringstream in(to_config_text(c));
  const auto d = parse_config(in);
  EXPECT_EQ(to_config_text(d), to_config_text(c));
  EXPECT_EQ(d.master_seed, c.master_seed);
  EXPECT_FALSE(d.excitation);
}

TEST(Config, RejectsBadInput) {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("colour = blue"), DomainError);
  EXPECT_THROW(parse("alpha 0.5"), DomainError);
  EXPECT_THROW(parse("alpha = x"), DomainError);
  EXPECT_THROW(parse("n_list = 100, 50"), DomainError);
  EXPECT_THROW(parse("paths = 10"), DomainError);
  EXPECT_THROW(parse("alpha = 1.5"), DomainError);
  EXPECT_THROW(parse("h = 0.3"), DomainError);
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), Error);
}

TEST(ParallelMap, ResultsDoNotDependOnThreads) {
  auto f = [](std::size_t i) {
    if (i == 7) throw BudgetExceeded("too many", 0);
    Rng r(path_seed(1, i));
    return r.uniform();
  };
  const auto one = parallel_map<double>(50, 1, f);
  const auto many = parallel_map<double>(50, 4, f);
  for (std::size_t i = 0; i < 50; ++i) {
    if (i == 7) {
      EXPECT_TRUE(one[i].error && many[i].error);
      continue;
    }
    EXPECT_EQ(*one[i].value, *many[i].value);
  }
}

TEST(Study, PoissonModeMeanScaling) {
  const auto cfg = poisson_config();
  const auto rep = run_convergence_study(cfg);
  ASSERT_EQ(rep.ensembles.size(), 2u);
  for (const auto& e : rep.ensembles) {
    const double n = static_cast<double>(e.n);
    const double target = e.mu_n * n / std::pow(n, 2 * cfg.alpha);
    EXPECT_LE(std::abs(e.X1.mean - target), kSigmaGate * e.X1.se) << e.n;
    EXPECT_EQ(e.X1.count, cfg.paths);
    // Hawkes-free count mean along the grid: mu_n n t / n^(2 alpha).
    for (const auto& m : e.X_moments) {
      EXPECT_LE(std::abs(m.mean - target * m.t), kSigmaGate * m.mean_se);
    }
  }
  ASSERT_EQ(rep.gates.size(), 11u);
  for (int i = 0; i < 11; ++i) EXPECT_EQ(rep.gates[i].id, i + 1);
}

TEST(Study, ReportIsDeterministicAndThreadIndependent) {
  auto cfg = poisson_config();
  cfg.threads = 1;
  const auto a = run_convergence_study(cfg).to_json();
  cfg.threads = 3;
  const auto b = run_convergence_study(cfg).to_json();
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"schema_version\": 1"), std::string::npos);
  cfg.master_seed += 1;
  EXPECT_NE(run_convergence_study(cfg).to_json(), a);
}
