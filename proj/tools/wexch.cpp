// Command-line runner for the work-exchange latency simulator.
//
//   wexch run   --scheme exchange_known --n 100000 --k 10 --mu 50 --sigma2 400 --seed 7
//   wexch sweep --kind threshold --schemes exchange_unknown --trials 200 --out fig7.csv
//
// Exit status: 0 success, 1 runtime failure, 2 invalid input.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wexch/sweep.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

wexch::Scheme scheme_or_throw(const std::string& name) {
  const auto s = wexch::parse_scheme(name);
  if (!s) throw std::invalid_argument("unknown scheme '" + name + "'");
  return *s;
}

double real_or_throw(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument("cannot parse grid value '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency simulator for heterogeneous master/worker computation"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Execute one seeded run and print a CSV row");
  std::string run_scheme = "exchange_known";
  long long run_n = 100000;
  long long run_k = 10;
  double run_mu = 50.0;
  double run_sigma2 = 0.0;
  std::string rates_file;
  double run_threshold = 0.01;
  std::uint64_t run_seed = 1;
  std::size_t mds_l = 0;
  long long run_mc = 2000;
  bool run_header = false;
  run->add_option("--scheme", run_scheme, "oracle | mds | fixed | exchange_known | exchange_unknown");
  run->add_option("--n", run_n, "Number of data points");
  auto* k_opt = run->add_option("--k", run_k, "Number of workers");
  run->add_option("--mu", run_mu, "Mean worker rate (points/second)");
  run->add_option("--sigma2", run_sigma2, "Variance of worker rates");
  run->add_option("--rates-file", rates_file, "One rate per line; replaces --mu/--sigma2 sampling");
  run->add_option("--threshold-frac", run_threshold, "Cutting threshold as a fraction of N/K");
  run->add_option("--seed", run_seed, "Seed");
  run->add_option("--mds-l", mds_l, "MDS code dimension (default: optimised)");
  run->add_option("--mc-trials", run_mc, "Monte Carlo trials per L for MDS optimisation");
  run->add_flag("--header", run_header, "Print the CSV header line first");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid and write a CSV file");
  std::string kind = "single";
  std::string grid;
  std::string schemes;
  wexch::SweepSpec spec;
  long long sw_n = spec.n;
  long long sw_k = spec.k;
  std::optional<double> sw_sigma2;
  std::optional<std::string> out_path;
  long long sw_mc = spec.mc_trials;
  sweep->add_option("--kind", kind, "lambda_sum | sigma2_comm | sigma2_iters | threshold | single");
  sweep->add_option("--grid", grid, "Comma-separated grid values (default depends on --kind)");
  sweep->add_option("--schemes", schemes, "Comma-separated schemes (default: all)");
  sweep->add_option("--n", sw_n, "Number of data points");
  sweep->add_option("--k", sw_k, "Number of workers");
  sweep->add_option("--mu", spec.mu, "Mean worker rate");
  sweep->add_option("--sigma2", sw_sigma2, "Rate variance for threshold/single sweeps");
  sweep->add_option("--threshold-frac", spec.threshold_fraction, "Cutting threshold fraction of N/K");
  sweep->add_option("--trials", spec.trials, "Trials per profile");
  sweep->add_option("--profiles", spec.profiles, "Sampled profiles per grid point");
  sweep->add_option("--seed", spec.seed, "Base seed");
  sweep->add_option("--mc-trials", sw_mc, "Monte Carlo trials per L for MDS optimisation");
  sweep->add_option("--threads", spec.threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out", out_path, "Output CSV path (relative paths use $WEXCH_OUTPUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) {
      wexch::RunRequest req;
      req.config.scheme = scheme_or_throw(run_scheme);
      req.config.n = run_n;
      req.config.k = run_k;
      req.config.threshold_fraction = run_threshold;
      req.config.seed = run_seed;
      req.mu = run_mu;
      req.sigma2 = run_sigma2;
      req.mc_trials = run_mc;
      if (mds_l > 0) req.mds_l = mds_l;
      if (!rates_file.empty()) {
        req.rates = wexch::read_rates_file(rates_file);
        const auto file_k = static_cast<long long>(req.rates->size());
        if (k_opt->count() > 0 && run_k != file_k) {
          throw std::invalid_argument("--k " + std::to_string(run_k) + " disagrees with the " +
                                      std::to_string(file_k) + " rates in " + rates_file);
        }
        req.config.k = file_k;
      }
      const wexch::SweepRow row = wexch::run_single(req, &std::cerr);
      if (run_header) std::cout << wexch::kCsvHeader << '\n';
      std::cout << wexch::format_row(row) << '\n';
      return 0;
    }

    const auto parsed_kind = wexch::parse_sweep_kind(kind);
    if (!parsed_kind) throw std::invalid_argument("unknown sweep kind '" + kind + "'");
    spec.kind = *parsed_kind;
    spec.n = sw_n;
    spec.k = sw_k;
    spec.sigma2 = sw_sigma2;
    spec.mc_trials = sw_mc;
    for (const std::string& g : split_list(grid)) spec.grid.push_back(real_or_throw(g));
    if (!schemes.empty()) {
      spec.schemes.clear();
      for (const std::string& s : split_list(schemes)) spec.schemes.push_back(scheme_or_throw(s));
    }
    spec.validate();

    const auto path = wexch::resolve_output_path(out_path, spec.kind);
    std::ofstream out(path);
    if (!out) {
      std::cerr << "error: cannot write " << path << '\n';
      return kExitRuntime;
    }
    const auto rows = wexch::run_sweep(spec, &std::cerr);
    wexch::write_csv(out, spec, rows);
    out.flush();
    if (!out) {
      std::cerr << "error: failed writing " << path << '\n';
      return kExitRuntime;
    }
    std::cerr << "wrote " << rows.size() << " rows to " << path << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
