#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wexch/metrics.hpp"
#include "wexch/model.hpp"

namespace wexch {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Column header of every CSV this tool writes.
inline constexpr std::string_view kCsvHeader =
    "sweep_kind,grid_value,scheme,N,K,mu,sigma2,threshold_fraction,profiles,trials,"
    "mean_T_comp,se_T_comp,mean_Ncomm_norm,se_Ncomm_norm,mean_I,se_I,oracle_ref,analytic_ref";

/// Environment variable naming the directory for relative or default output paths.
inline constexpr const char* kOutputDirEnv = "WEXCH_OUTPUT_DIR";

enum class SweepKind : std::uint8_t { lambda_sum, sigma2_comm, sigma2_iters, threshold, single };

std::string_view to_string(SweepKind kind) noexcept;
std::optional<SweepKind> parse_sweep_kind(std::string_view name) noexcept;

/// An experiment grid. What a grid value means depends on the kind:
///   lambda_sum    total rate; profiles are rescaled to sum to it and each
///                 value is run at sigma2 = 0 and sigma2 = (value/K)^2 / 6
///   sigma2_*      rate variance at mean `mu`
///   threshold     cutting threshold as a fraction of N/K, at `sigma2`
///   single        one point at `sigma2`; the grid value is sigma2
struct SweepSpec {
  SweepKind kind = SweepKind::single;
  /// Empty means the kind's default grid.
  std::vector<double> grid;
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  Count n = 100000;
  Count k = 10;
  double mu = 50.0;
  /// Used by the threshold and single kinds. Defaults to mu^2/6 for threshold
  /// sweeps and 0 for single.
  std::optional<double> sigma2;
  double threshold_fraction = 0.01;
  std::size_t profiles = 20;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// Monte Carlo trials per L when optimising the MDS code dimension.
  std::int64_t mc_trials = 2000;
  /// Worker threads; 0 means one per hardware thread.
  unsigned threads = 0;
  /// Fixed rates instead of sampled profiles (single kind only).
  std::optional<std::vector<double>> rates;

  std::vector<double> resolved_grid() const;
  /// Throws std::invalid_argument on an inadmissible spec.
  void validate() const;
};

struct SweepRow {
  SweepKind kind = SweepKind::single;
  std::optional<double> grid_value;
  Scheme scheme = Scheme::oracle;
  Count n = 0;
  Count k = 0;
  double mu = 0.0;
  double sigma2 = 0.0;
  double threshold_fraction = 0.0;
  std::size_t profiles = 0;
  std::size_t trials = 0;
  Estimate t_comp;
  Estimate comm_normalized;
  Estimate iterations;
  std::optional<double> oracle_ref;
  std::optional<double> analytic_ref;
};

/// One CSV line (no newline) with 9 significant digits per real.
std::string format_row(const SweepRow& row);
/// Inverse of format_row up to the printed precision. Throws std::invalid_argument.
SweepRow parse_row(std::string_view line);

/// Runs every grid point and scheme. Rows come back in grid order, then
/// sigma2 level, then the order of spec.schemes, whatever the thread count.
/// Notices (such as the Monte Carlo fallback for MDS) go to `notices`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::ostream* notices = nullptr);

/// Comment lines describing the tool, generator, seed scheme and spec. The
/// "# generated:" line is the only one that varies between identical runs.
std::string metadata_header(const SweepSpec& spec, bool with_timestamp = true);

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows,
               bool with_timestamp = true);

/// Resolve the sweep output path against kOutputDirEnv.
std::filesystem::path resolve_output_path(const std::optional<std::string>& requested, SweepKind kind);

/// A single seeded run.
struct RunRequest {
  ExperimentConfig config;
  double mu = 50.0;
  double sigma2 = 0.0;
  std::optional<std::vector<double>> rates;
  std::optional<std::size_t> mds_l;
  std::int64_t mc_trials = 2000;
};

/// Execute one run and describe it as a CSV row (kind single, one profile,
/// one trial, standard errors 0).
SweepRow run_single(const RunRequest& request, std::ostream* notices = nullptr);

/// Read one rate per line; blank lines and lines starting with '#' are
/// skipped. Throws std::invalid_argument naming the offending line.
std::vector<double> read_rates_file(const std::filesystem::path& path);

}  // namespace wexch
