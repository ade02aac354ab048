#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dtnperc/stats.hpp"

namespace dtnperc::cli {

// Exit-code contract, fixed for scriptability.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kBracketError = 3;

struct SampleOptions {
  double gamma = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t s_max = (std::uint64_t{1} << 20) + 1;
  std::string trace_path;  ///< empty: no trace output
};
/// Runs one realization, prints it as JSON on stdout, optionally writes the
/// acquisition trace CSV.
int cmd_sample(const SampleOptions& opt);

/// Runs the campaign described by a key=value config file and emits per-point
/// sample records plus cdf/bins/tailstat CSVs and a summary.
int cmd_sweep(const std::string& config_path);

struct EstimateOptions {
  double gamma = 0.0;
  SearchConfig search;
  std::uint64_t master_seed = 1;
  int workers = 0;
  std::string out_path;  ///< empty: stdout
};
/// Automated threshold search; writes the estimate document as JSON.
int cmd_estimate(const EstimateOptions& opt);

struct FluidOptions {
  std::optional<double> gamma;
  std::optional<double> mean_x;
  std::optional<double> mean_x2;
};
/// Prints the closed-form bounds as JSON: the fluid bound for --gamma, the
/// renewal threshold for --mean-x/--mean-x2.
int cmd_fluid(const FluidOptions& opt);

struct PlotDataOptions {
  std::string estimates_dir;  ///< directory of estimate JSON documents
  std::string table_csv;      ///< or a (gamma, eta_c) CSV
  std::string out_path;       ///< empty: stdout
};
/// Emits the two-curve (percolation vs fluid) threshold data CSV.
int cmd_plotdata(const PlotDataOptions& opt);

}  // namespace dtnperc::cli
