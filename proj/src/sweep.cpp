#include "wexch/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wexch/analytic.hpp"
#include "wexch/engine.hpp"

namespace wexch {

namespace {

constexpr std::uint64_t kProfileTag = 1;
constexpr std::uint64_t kRunTag = 2;
constexpr std::uint64_t kMdsTag = 3;

constexpr std::uint64_t kSingleProfileStream = 0;
constexpr std::uint64_t kSingleRunStreamBase = 1;
constexpr std::uint64_t kSingleMdsStream = 100;

std::uint64_t key_bits(double x) { return x == 0.0 ? 0 : std::bit_cast<std::uint64_t>(x); }
std::uint64_t scheme_tag(Scheme s) { return static_cast<std::uint64_t>(s); }

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_real(*x) : std::string(); }

struct GridPoint {
  double grid_value;
  double mu;
  double sigma2;
  double threshold_fraction;
  std::optional<double> rate_sum_target;
};

std::vector<GridPoint> expand(const SweepSpec& spec) {
  std::vector<GridPoint> out;
  for (double v : spec.resolved_grid()) {
    switch (spec.kind) {
      case SweepKind::lambda_sum: {
        const double mu = v / static_cast<double>(spec.k);
        out.push_back({v, mu, 0.0, spec.threshold_fraction, v});
        out.push_back({v, mu, mu * mu / 6.0, spec.threshold_fraction, v});
        break;
      }
      case SweepKind::sigma2_comm:
      case SweepKind::sigma2_iters:
      case SweepKind::single:
        out.push_back({v, spec.mu, v, spec.threshold_fraction, std::nullopt});
        break;
      case SweepKind::threshold:
        out.push_back({v, spec.mu, spec.sigma2.value_or(spec.mu * spec.mu / 6.0), v, std::nullopt});
        break;
    }
  }
  return out;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Exact optimisation when it fits the term budget, otherwise Monte Carlo.
MdsPlan plan_mds(Count n, const HeterogeneityProfile& profile, std::int64_t mc_trials,
                 RandomStream& rng, std::ostream* notices, bool& noticed) {
  try {
    return optimize_mds(n, profile, MdsEstimator::exact(), rng);
  } catch (const InfeasibleError& e) {
    if (notices && !noticed) {
      *notices << "notice: " << e.what() << "; falling back to Monte Carlo with " << mc_trials
               << " trials per L\n";
      noticed = true;
    }
    return optimize_mds(n, profile, MdsEstimator::monte_carlo(mc_trials), rng);
  }
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

double parse_real(const std::string& field, const char* name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + name + " from '" + field + "'");
  }
}

long long parse_integer(const std::string& field, const char* name) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + name + " from '" + field + "'");
  }
}

std::optional<double> parse_opt_real(const std::string& field, const char* name) {
  if (field.empty()) return std::nullopt;
  return parse_real(field, name);
}

}  // namespace

std::string_view to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::lambda_sum: return "lambda_sum";
    case SweepKind::sigma2_comm: return "sigma2_comm";
    case SweepKind::sigma2_iters: return "sigma2_iters";
    case SweepKind::threshold: return "threshold";
    case SweepKind::single: return "single";
  }
  return "unknown";
}

std::optional<SweepKind> parse_sweep_kind(std::string_view name) noexcept {
  for (SweepKind k : {SweepKind::lambda_sum, SweepKind::sigma2_comm, SweepKind::sigma2_iters,
                      SweepKind::threshold, SweepKind::single}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<double> SweepSpec::resolved_grid() const {
  if (!grid.empty()) return grid;
  switch (kind) {
    case SweepKind::lambda_sum: {
      std::vector<double> g;
      for (double mean : {10.0, 25.0, 50.0, 100.0}) g.push_back(mean * static_cast<double>(k));
      return g;
    }
    case SweepKind::sigma2_comm:
    case SweepKind::sigma2_iters: {
      std::vector<double> g;
      const double top = ProfileSampler::max_sigma2(mu);
      for (int i = 0; i < 6; ++i) g.push_back(top * i / 5.0);
      return g;
    }
    case SweepKind::threshold: return {1e-4, 1e-3, 1e-2, 1e-1};
    case SweepKind::single: return {sigma2.value_or(0.0)};
  }
  return {};
}

void SweepSpec::validate() const {
  ExperimentConfig{n, k, threshold_fraction, seed, Scheme::oracle}.validate();
  if (schemes.empty()) throw std::invalid_argument("at least one scheme is required");
  if (profiles < 1) throw std::invalid_argument("profiles must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (mc_trials < 1) throw std::invalid_argument("mc trials must be at least 1");
  if (rates) {
    if (kind != SweepKind::single) throw std::invalid_argument("explicit rates need the single kind");
    if (static_cast<Count>(rates->size()) != k) throw std::invalid_argument("rates file size differs from K");
    HeterogeneityProfile check(*rates);
    (void)check;
    return;
  }
  const std::vector<double> g = resolved_grid();
  if (g.empty()) throw std::invalid_argument("grid must not be empty");
  for (double v : g) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
    switch (kind) {
      case SweepKind::lambda_sum:
        if (!(v > 0.0)) throw std::invalid_argument("lambda_sum grid values must be positive");
        break;
      case SweepKind::sigma2_comm:
      case SweepKind::sigma2_iters:
      case SweepKind::single:
        ProfileSampler{mu, v}.validate();
        break;
      case SweepKind::threshold:
        if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument("threshold fractions must lie in [0, 1)");
        ProfileSampler{mu, sigma2.value_or(mu * mu / 6.0)}.validate();
        break;
    }
  }
}

std::string format_row(const SweepRow& r) {
  std::string s;
  s += to_string(r.kind);
  s += ',' + fmt_opt(r.grid_value);
  s += ',';
  s += to_string(r.scheme);
  s += ',' + std::to_string(r.n);
  s += ',' + std::to_string(r.k);
  s += ',' + fmt_real(r.mu);
  s += ',' + fmt_real(r.sigma2);
  s += ',' + fmt_real(r.threshold_fraction);
  s += ',' + std::to_string(r.profiles);
  s += ',' + std::to_string(r.trials);
  s += ',' + fmt_real(r.t_comp.mean);
  s += ',' + fmt_real(r.t_comp.se);
  s += ',' + fmt_real(r.comm_normalized.mean);
  s += ',' + fmt_real(r.comm_normalized.se);
  s += ',' + fmt_real(r.iterations.mean);
  s += ',' + fmt_real(r.iterations.se);
  s += ',' + fmt_opt(r.oracle_ref);
  s += ',' + fmt_opt(r.analytic_ref);
  return s;
}

SweepRow parse_row(std::string_view line) {
  const std::vector<std::string> f = split_fields(line);
  if (f.size() != 18) {
    throw std::invalid_argument("expected 18 CSV fields, found " + std::to_string(f.size()));
  }
  SweepRow r;
  const auto kind = parse_sweep_kind(f[0]);
  if (!kind) throw std::invalid_argument("unknown sweep kind '" + f[0] + "'");
  r.kind = *kind;
  r.grid_value = parse_opt_real(f[1], "grid_value");
  const auto scheme = parse_scheme(f[2]);
  if (!scheme) throw std::invalid_argument("unknown scheme '" + f[2] + "'");
  r.scheme = *scheme;
  r.n = parse_integer(f[3], "N");
  r.k = parse_integer(f[4], "K");
  r.mu = parse_real(f[5], "mu");
  r.sigma2 = parse_real(f[6], "sigma2");
  r.threshold_fraction = parse_real(f[7], "threshold_fraction");
  r.profiles = static_cast<std::size_t>(parse_integer(f[8], "profiles"));
  r.trials = static_cast<std::size_t>(parse_integer(f[9], "trials"));
  r.t_comp = {parse_real(f[10], "mean_T_comp"), parse_real(f[11], "se_T_comp")};
  r.comm_normalized = {parse_real(f[12], "mean_Ncomm_norm"), parse_real(f[13], "se_Ncomm_norm")};
  r.iterations = {parse_real(f[14], "mean_I"), parse_real(f[15], "se_I")};
  r.oracle_ref = parse_opt_real(f[16], "oracle_ref");
  r.analytic_ref = parse_opt_real(f[17], "analytic_ref");
  return r;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::ostream* notices) {
  spec.validate();
  std::vector<SweepRow> rows;
  bool noticed = false;
  const bool wants_mds = std::find(spec.schemes.begin(), spec.schemes.end(), Scheme::mds) != spec.schemes.end();

  for (GridPoint pt : expand(spec)) {
    if (spec.rates) {
      const HeterogeneityProfile fixed(*spec.rates);
      pt.mu = fixed.mean();
      pt.sigma2 = fixed.variance();
      pt.grid_value = pt.sigma2;
    }
    const std::uint64_t mu_key = key_bits(pt.mu);
    const std::uint64_t s2_key = key_bits(pt.sigma2);

    std::vector<HeterogeneityProfile> profiles;
    if (spec.rates) {
      profiles.emplace_back(*spec.rates);
    } else {
      for (std::size_t p = 0; p < spec.profiles; ++p) {
        RandomStream rng(derive_seed(spec.seed, {kProfileTag, mu_key, s2_key, p}));
        HeterogeneityProfile prof = sample_profile(static_cast<std::size_t>(spec.k), pt.mu, pt.sigma2, rng);
        if (pt.rate_sum_target) prof = prof.scaled(*pt.rate_sum_target / prof.rate_sum());
        profiles.push_back(std::move(prof));
      }
    }
    const std::size_t n_prof = profiles.size();

    double oracle_acc = 0.0;
    double comm_acc = 0.0;
    for (const auto& prof : profiles) {
      oracle_acc += oracle_mean(spec.n, prof);
      comm_acc += expected_comm_unknown(spec.n, spec.k, prof) / static_cast<double>(spec.n);
    }
    const double oracle_ref = oracle_acc / static_cast<double>(n_prof);
    const double comm_ref = comm_acc / static_cast<double>(n_prof);

    std::vector<MdsPlan> plans;
    double mds_ref = 0.0;
    if (wants_mds) {
      for (std::size_t p = 0; p < n_prof; ++p) {
        RandomStream rng(derive_seed(spec.seed, {kMdsTag, mu_key, s2_key, p}));
        plans.push_back(plan_mds(spec.n, profiles[p], spec.mc_trials, rng, notices, noticed));
        mds_ref += plans.back().mean;
      }
      mds_ref /= static_cast<double>(n_prof);
    }

    for (Scheme scheme : spec.schemes) {
      std::vector<RunMetrics> runs(n_prof * spec.trials);
      const ExperimentConfig config{spec.n, spec.k, pt.threshold_fraction, spec.seed, scheme};
      parallel_for(runs.size(), spec.threads, [&](std::size_t i) {
        const std::size_t p = i / spec.trials;
        const std::size_t t = i % spec.trials;
        RandomStream rng(derive_seed(spec.seed, {kRunTag, mu_key, s2_key, p, t, scheme_tag(scheme)}));
        RunOptions options;
        if (scheme == Scheme::mds) options.mds_l = plans[p].l_star;
        runs[i] = run_scheme(config, profiles[p], rng, options);
      });
      const TrialSummary s = summarize(runs);

      SweepRow row;
      row.kind = spec.kind;
      row.grid_value = pt.grid_value;
      row.scheme = scheme;
      row.n = spec.n;
      row.k = spec.k;
      row.mu = pt.mu;
      row.sigma2 = pt.sigma2;
      row.threshold_fraction = pt.threshold_fraction;
      row.profiles = n_prof;
      row.trials = spec.trials;
      row.t_comp = s.t_comp;
      row.comm_normalized = s.comm_normalized;
      row.iterations = s.iterations;
      row.oracle_ref = oracle_ref;
      switch (scheme) {
        case Scheme::oracle: row.analytic_ref = oracle_ref; break;
        case Scheme::mds: row.analytic_ref = mds_ref; break;
        case Scheme::exchange_unknown: row.analytic_ref = comm_ref; break;
        case Scheme::fixed:
        case Scheme::exchange_known: break;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string metadata_header(const SweepSpec& spec, bool with_timestamp) {
  std::ostringstream h;
  h << "# tool: wexch " << kToolVersion << '\n';
  h << "# rng: " << RandomStream::kGeneratorName << '\n';
  h << "# seeds: profile=derive(base,{1,bits(mu),bits(sigma2),profile}) "
       "run=derive(base,{2,bits(mu),bits(sigma2),profile,trial,scheme}) "
       "mds=derive(base,{3,bits(mu),bits(sigma2),profile})\n";
  h << "# spec: kind=" << to_string(spec.kind) << " grid=";
  const std::vector<double> g = spec.resolved_grid();
  for (std::size_t i = 0; i < g.size(); ++i) h << (i ? ";" : "") << fmt_real(g[i]);
  h << " schemes=";
  for (std::size_t i = 0; i < spec.schemes.size(); ++i) h << (i ? ";" : "") << to_string(spec.schemes[i]);
  h << " n=" << spec.n << " k=" << spec.k << " mu=" << fmt_real(spec.mu)
    << " sigma2=" << (spec.sigma2 ? fmt_real(*spec.sigma2) : std::string("default"))
    << " threshold_fraction=" << fmt_real(spec.threshold_fraction) << " profiles=" << spec.profiles
    << " trials=" << spec.trials << " mc_trials=" << spec.mc_trials << '\n';
  h << "# base_seed: " << spec.seed << '\n';
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    h << "# generated: " << buf << '\n';
  }
  return h.str();
}

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows,
               bool with_timestamp) {
  out << metadata_header(spec, with_timestamp) << kCsvHeader << '\n';
  for (const SweepRow& r : rows) out << format_row(r) << '\n';
}

std::filesystem::path resolve_output_path(const std::optional<std::string>& requested, SweepKind kind) {
  const char* env = std::getenv(kOutputDirEnv);
  const std::filesystem::path base = (env && *env) ? std::filesystem::path(env) : std::filesystem::path();
  if (requested) {
    const std::filesystem::path p(*requested);
    return (p.is_absolute() || base.empty()) ? p : base / p;
  }
  const std::string name = "sweep_" + std::string(to_string(kind)) + ".csv";
  return base.empty() ? std::filesystem::path(name) : base / name;
}

SweepRow run_single(const RunRequest& req, std::ostream* notices) {
  req.config.validate();
  const std::uint64_t seed = req.config.seed;

  std::optional<HeterogeneityProfile> profile;
  if (req.rates) {
    if (static_cast<Count>(req.rates->size()) != req.config.k) {
      throw std::invalid_argument("rates file has " + std::to_string(req.rates->size()) +
                                  " rates but K is " + std::to_string(req.config.k));
    }
    profile.emplace(*req.rates);
  } else {
    RandomStream rng(seed, kSingleProfileStream);
    profile.emplace(sample_profile(static_cast<std::size_t>(req.config.k), req.mu, req.sigma2, rng));
  }

  RunOptions options;
  std::optional<double> analytic;
  const Scheme scheme = req.config.scheme;
  const Count n = req.config.n;
  if (scheme == Scheme::mds) {
    RandomStream rng(seed, kSingleMdsStream);
    bool noticed = false;
    if (req.mds_l) {
      if (*req.mds_l < 1 || *req.mds_l > profile->size()) {
        throw std::invalid_argument("--mds-l must lie in [1, K]");
      }
      options.mds_l = req.mds_l;
      try {
        analytic = mds_mean(*req.mds_l, n, *profile);
      } catch (const InfeasibleError&) {
        analytic = mc_orderstat_mean(OrderStatSpec{*req.mds_l, mds_chunk(n, *req.mds_l), *profile},
                                     req.mc_trials, rng)
                       .mean;
      }
    } else {
      const MdsPlan plan = plan_mds(n, *profile, req.mc_trials, rng, notices, noticed);
      options.mds_l = plan.l_star;
      analytic = plan.mean;
    }
  } else if (scheme == Scheme::oracle) {
    analytic = oracle_mean(n, *profile);
  } else if (scheme == Scheme::exchange_unknown) {
    analytic = expected_comm_unknown(n, req.config.k, *profile) / static_cast<double>(n);
  }

  RandomStream rng(seed, kSingleRunStreamBase + scheme_tag(scheme));
  const RunMetrics run = run_scheme(req.config, *profile, rng, options);

  SweepRow row;
  row.kind = SweepKind::single;
  row.mu = req.rates ? profile->mean() : req.mu;
  row.sigma2 = req.rates ? profile->variance() : req.sigma2;
  row.grid_value = row.sigma2;
  row.scheme = scheme;
  row.n = n;
  row.k = req.config.k;
  row.threshold_fraction = req.config.threshold_fraction;
  row.profiles = 1;
  row.trials = 1;
  row.t_comp = {run.t_comp, 0.0};
  row.comm_normalized = {run.normalized_comm(), 0.0};
  row.iterations = {static_cast<double>(run.iterations), 0.0};
  row.oracle_ref = oracle_mean(n, *profile);
  row.analytic_ref = analytic;
  return row;
}

std::vector<double> read_rates_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open rates file " + path.string());
  std::vector<double> rates;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string field = line.substr(first, last - first + 1);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": cannot parse '" + field + "' as a rate");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": rate must be positive and finite, got '" + field + "'");
    }
    rates.push_back(v);
  }
  if (rates.empty()) throw std::invalid_argument("rates file " + path.string() + " has no rates");
  return rates;
}

}  // namespace wexch
