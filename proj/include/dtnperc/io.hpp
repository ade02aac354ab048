#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtnperc/epidemic.hpp"
#include "dtnperc/stats.hpp"

// Plot-ready CSV and JSON emitters plus the parsers needed for campaign
// resume. Every file starts with a schema-version comment line and a header
// row naming the columns; doubles are serialized with 17 significant digits
// so a parse-print round trip is exact.

namespace dtnperc::io {

/// Round-trip exact decimal form (17 significant digits) of a double.
std::string format_double(double v);

/// Strict double parse; throws std::invalid_argument on trailing garbage.
double parse_double(const std::string& text);

// -- raw sample records (the campaign checkpoint format) --------------------

struct SamplesFile {
  double gamma = 0.0;
  double eta = 0.0;
  std::uint64_t s_max = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t point_index = 0;
  std::vector<ClusterSample> samples;
};

/// Writes header plus any already-completed rows; returns the stream opened
/// in the position where further rows can be appended with append_sample_row.
class SamplesWriter {
 public:
  SamplesWriter(const std::filesystem::path& path, const SamplesFile& meta);
  ~SamplesWriter();
  SamplesWriter(const SamplesWriter&) = delete;
  SamplesWriter& operator=(const SamplesWriter&) = delete;

  void append(const ClusterSample& sample);
  void flush();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double gamma_ = 0.0;
  double eta_ = 0.0;
};

/// Parses a (possibly truncated) samples file; ignores an incomplete final
/// line so an interrupted run stays resumable.
SamplesFile read_samples_csv(const std::filesystem::path& path);

// -- derived statistics ------------------------------------------------------

void write_cdf_csv(const std::filesystem::path& path, const EmpiricalCdf& cdf,
                   std::uint64_t n_samples);
void write_bins_csv(const std::filesystem::path& path, const BinTable& bins);
void write_tailstat_csv(const std::filesystem::path& path,
                        std::span<const TailPoint> stat,
                        const UniversalExponents& exps);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

// -- JSON documents ----------------------------------------------------------

std::string cluster_sample_json(const ClusterSample& sample, double gamma,
                                double eta, std::uint64_t s_max);
std::string estimate_result_json(const EstimateResult& result);
EstimateResult read_estimate_json(const std::filesystem::path& path);

// -- threshold curve data ----------------------------------------------------

struct ThresholdPoint {
  double gamma = 0.0;
  double eta_c = 0.0;
};

/// Reads a two-column (gamma, eta_c) CSV; '#' comments and a header row are
/// accepted.
std::vector<ThresholdPoint> read_threshold_csv(const std::filesystem::path& path);

/// Writes (gamma, eta_c, nu_c, nu_c_fluid) rows sorted by gamma; the fluid
/// column is empty where the bound is undefined (gamma = 0).
void write_threshold_curve_csv(std::ostream& out, std::vector<ThresholdPoint> points);
void write_threshold_curve_csv(const std::filesystem::path& path,
                               std::vector<ThresholdPoint> points);

}  // namespace dtnperc::io
