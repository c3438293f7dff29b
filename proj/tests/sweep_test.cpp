#include "wexch/sweep.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace wexch {
namespace {

std::string body_of(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# generated:", 0) == 0) continue;
    out += line + '\n';
  }
  return out;
}

SweepSpec small_spec(SweepKind kind) {
  SweepSpec s;
  s.kind = kind;
  s.n = 2000;
  s.k = 5;
  s.mu = 10.0;
  s.profiles = 3;
  s.trials = 4;
  s.mc_trials = 300;
  s.threads = 2;
  return s;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value) {
      ::setenv(name, value, 1);
    } else {
      ::unsetenv(name);
    }
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(SweepRow, FormatParseRoundTrip) {
  SweepRow r;
  r.kind = SweepKind::threshold;
  r.grid_value = 0.001;
  r.scheme = Scheme::exchange_unknown;
  r.n = 100000;
  r.k = 10;
  r.mu = 50.0;
  r.sigma2 = 416.666666666667;
  r.threshold_fraction = 0.001;
  r.profiles = 20;
  r.trials = 100;
  r.t_comp = {200.123456789, 0.5};
  r.comm_normalized = {0.19, 0.001};
  r.iterations = {12.5, 0.25};
  r.oracle_ref = 199.9;
  const std::string line = format_row(r);
  EXPECT_EQ(line.find(' '), std::string::npos);
  const SweepRow back = parse_row(line);
  EXPECT_EQ(format_row(back), line);
  EXPECT_EQ(back.kind, r.kind);
  EXPECT_EQ(back.scheme, r.scheme);
  EXPECT_EQ(back.n, r.n);
  EXPECT_FALSE(back.analytic_ref.has_value());
  EXPECT_NEAR(*back.oracle_ref, 199.9, 1e-9);

  const std::string header(kCsvHeader);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(line.begin(), line.end(), ','));
  EXPECT_THROW(parse_row("single,1,oracle"), std::invalid_argument);
  EXPECT_THROW(parse_row("single,1,nope,1,1,1,1,0,1,1,1,0,0,0,0,0,,"), std::invalid_argument);
}

TEST(SweepSpec, DefaultGridsAndValidation) {
  auto s = small_spec(SweepKind::threshold);
  EXPECT_EQ(s.resolved_grid(), (std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1}));
  s.kind = SweepKind::lambda_sum;
  EXPECT_EQ(s.resolved_grid(), (std::vector<double>{50.0, 125.0, 250.0, 500.0}));
  s.kind = SweepKind::sigma2_comm;
  const auto g = s.resolved_grid();
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 100.0 / 3.0, 1e-12);

  s.grid = {100.0};  // above mu^2/3
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.grid = {1.0};
  s.trials = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.trials = 1;
  s.schemes.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(RunSweep, DeterministicBodyAcrossThreadCounts) {
  auto s = small_spec(SweepKind::sigma2_comm);
  s.grid = {0.0, 20.0};
  std::ostringstream a, b;
  write_csv(a, s, run_sweep(s));
  s.threads = 1;
  write_csv(b, s, run_sweep(s));
  // The thread count is not part of the metadata, so the files match.
  EXPECT_EQ(body_of(a.str()), body_of(b.str()));
  EXPECT_NE(a.str().find("# generated:"), std::string::npos);
  EXPECT_NE(a.str().find(std::string(kCsvHeader)), std::string::npos);
}

TEST(RunSweep, RowOrderAndReferences) {
  auto s = small_spec(SweepKind::sigma2_comm);
  s.grid = {0.0, 10.0};
  const auto rows = run_sweep(s);
  ASSERT_EQ(rows.size(), 2 * s.schemes.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].scheme, s.schemes[i % s.schemes.size()]);
    EXPECT_EQ(*rows[i].grid_value, s.grid[i / s.schemes.size()]);
    ASSERT_TRUE(rows[i].oracle_ref.has_value());
    switch (rows[i].scheme) {
      case Scheme::oracle: EXPECT_EQ(rows[i].analytic_ref, rows[i].oracle_ref); break;
      case Scheme::mds:
      case Scheme::exchange_unknown: EXPECT_TRUE(rows[i].analytic_ref.has_value()); break;
      default: EXPECT_FALSE(rows[i].analytic_ref.has_value()); break;
    }
  }
  // Homogeneous profiles: the pooled bound is exact and nothing should ship.
  EXPECT_NEAR(*rows[0].oracle_ref, 2000.0 / 50.0, 1e-9);
}

TEST(RunSweep, RowRerunsFromItsOwnFields) {
  auto s = small_spec(SweepKind::threshold);
  s.schemes = {Scheme::exchange_unknown, Scheme::exchange_known};
  s.sigma2 = 25.0;
  const auto all = run_sweep(s);
  auto one = s;
  one.grid = {1e-2};
  const auto rerun = run_sweep(one);
  ASSERT_EQ(rerun.size(), 2u);
  EXPECT_EQ(format_row(rerun[0]), format_row(all[4]));
  EXPECT_EQ(format_row(rerun[1]), format_row(all[5]));
}

TEST(RunSweep, ZeroVarianceUnknownShipsAlmostNothing) {
  SweepSpec s;
  s.kind = SweepKind::sigma2_comm;
  s.grid = {0.0};
  s.schemes = {Scheme::exchange_unknown};
  s.n = 100000;
  s.profiles = 2;
  s.trials = 20;
  const auto rows = run_sweep(s);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_LE(rows[0].comm_normalized.mean, 0.01);
}

TEST(RunSweep, ThresholdReducesCoordination) {
  SweepSpec s;
  s.kind = SweepKind::threshold;
  s.schemes = {Scheme::exchange_unknown};
  s.n = 20000;
  s.profiles = 5;
  s.trials = 20;
  const auto rows = run_sweep(s);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].iterations.mean, rows[i - 1].iterations.mean + rows[i].iterations.se);
  }
}

TEST(RunSweep, LambdaSumKnownTracksOracle) {
  SweepSpec s;
  s.kind = SweepKind::lambda_sum;
  s.schemes = {Scheme::oracle, Scheme::exchange_known};
  s.n = 20000;
  s.profiles = 3;
  s.trials = 10;
  const auto rows = run_sweep(s);
  ASSERT_EQ(rows.size(), 16u);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    EXPECT_NEAR(rows[i].k * rows[i].mu, *rows[i].grid_value, 1e-9 * *rows[i].grid_value);
    if (rows[i].sigma2 != 0.0) continue;
    EXPECT_NEAR(rows[i + 1].t_comp.mean, rows[i].t_comp.mean, 0.05 * rows[i].t_comp.mean);
    EXPECT_NEAR(*rows[i].oracle_ref, 20000.0 / *rows[i].grid_value, 1e-9 * *rows[i].oracle_ref);
  }
}

TEST(RunSweep, InfeasibleExactMdsFallsBackWithNotice) {
  auto s = small_spec(SweepKind::single);
  s.n = 20000;
  s.k = 12;
  s.schemes = {Scheme::mds};
  s.profiles = 1;
  s.trials = 2;
  std::ostringstream notices;
  const auto rows = run_sweep(s, &notices);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(notices.str().find("Monte Carlo"), std::string::npos);
  EXPECT_TRUE(rows[0].analytic_ref.has_value());
}

TEST(RunSingle, ExplicitRates) {
  RunRequest req;
  req.config.scheme = Scheme::oracle;
  req.config.n = 200;
  req.config.k = 3;
  req.config.seed = 7;
  req.rates = std::vector<double>{1.0, 3.0, 6.0};
  const auto a = run_single(req);
  const auto b = run_single(req);
  EXPECT_EQ(format_row(a), format_row(b));
  EXPECT_EQ(a.iterations.mean, 0.0);
  EXPECT_EQ(a.comm_normalized.mean, 0.0);
  EXPECT_NEAR(a.t_comp.mean, 20.0, 6.0);
  EXPECT_EQ(a.t_comp.se, 0.0);
  EXPECT_EQ(*a.oracle_ref, 20.0);
}

TEST(ResolveOutputPath, UsesEnvironmentDirectory) {
  {
    ScopedEnv env(kOutputDirEnv, "/tmp/wexch_out");
    EXPECT_EQ(resolve_output_path(std::string("a.csv"), SweepKind::threshold),
              std::filesystem::path("/tmp/wexch_out/a.csv"));
    EXPECT_EQ(resolve_output_path(std::string("/abs/b.csv"), SweepKind::threshold),
              std::filesystem::path("/abs/b.csv"));
    EXPECT_EQ(resolve_output_path(std::nullopt, SweepKind::threshold),
              std::filesystem::path("/tmp/wexch_out/sweep_threshold.csv"));
  }
  {
    ScopedEnv env(kOutputDirEnv, nullptr);
    EXPECT_EQ(resolve_output_path(std::nullopt, SweepKind::lambda_sum),
              std::filesystem::path("sweep_lambda_sum.csv"));
  }
}

TEST(ReadRatesFile, ParsesAndReportsLine) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "wexch_rates_good.txt";
  {
    std::ofstream f(good);
    f << "# rates\n1\n\n3.5\n  6 \n";
  }
  EXPECT_EQ(read_rates_file(good), (std::vector<double>{1.0, 3.5, 6.0}));

  const auto bad = dir / "wexch_rates_bad.txt";
  {
    std::ofstream f(bad);
    f << "1\nabc\n";
  }
  try {
    read_rates_file(bad);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }

  const auto neg = dir / "wexch_rates_neg.txt";
  {
    std::ofstream f(neg);
    f << "1\n2\n-4\n";
  }
  EXPECT_THROW(read_rates_file(neg), std::invalid_argument);
  EXPECT_THROW(read_rates_file(dir / "wexch_no_such_file.txt"), std::invalid_argument);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
  std::filesystem::remove(neg);
}

}  // namespace
}  // namespace wexch
