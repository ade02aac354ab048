#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtnperc/epidemic.hpp"
#include "dtnperc/model.hpp"
#include "dtnperc/stats.hpp"

namespace dtnperc {

/// One sampling campaign: N independent cluster samples for each eta in the
/// list, at a common gamma and s_max. Per-sample seeds are derived by hashing
/// (master_seed, point index, sample index), which makes the fan-out order
/// free and resumption trivial.
struct CampaignConfig {
  double gamma = 0.0;
  std::vector<double> etas;
  std::uint64_t samples = 1000;
  std::uint64_t s_max = std::uint64_t{1} << 16;
  std::uint64_t master_seed = 1;
  int workers = 0;      ///< 0: hardware concurrency
  std::string outdir;   ///< empty: $DTNPERC_OUTDIR, else "."
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the plain-text key=value campaign format ('#' comments, blank lines
/// allowed; eta takes a comma-separated list). Throws ConfigError with the
/// offending line number.
CampaignConfig parse_campaign_config(const std::filesystem::path& path);
CampaignConfig parse_campaign_config(std::istream& in, const std::string& name);

/// Deterministic per-sample seed.
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t point_index,
                          std::uint64_t sample_index);

/// Runs `count` independent simulations across `workers` threads (0 =
/// hardware concurrency). Every sample owns its world end to end; results are
/// slotted by index, so the outcome is identical for any worker count.
std::vector<ClusterSample> parallel_samples(
    const ModelParams& params, std::uint64_t s_max,
    const std::function<std::uint64_t(std::uint64_t)>& seed_of,
    std::uint64_t count, int workers);

/// Binds a PointSampler for estimate_eta_c to (gamma, s_max, master_seed,
/// workers); each sampler call derives fresh seeds from its salt.
PointSampler make_point_sampler(double gamma, std::uint64_t s_max,
                                std::uint64_t master_seed, int workers);

struct PointResult {
  double gamma = 0.0;
  double eta = 0.0;
  BinTable bins;  // always recomputed from the records, never cached
  std::vector<ClusterSample> samples;
  double strength = 0.0;
  double mean_size = 0.0;
  std::uint64_t resumed_samples = 0;  ///< rows recovered from a checkpoint
  std::filesystem::path records_path;
};

/// Keyed by (gamma, eta).
using CampaignResult = std::map<std::pair<double, double>, PointResult>;

/// Exactly cfg.samples samples per point, written to per-point record files
/// under the output directory as they complete. An interrupted campaign
/// resumes from the record files without re-sampling completed work; the
/// merged statistics are byte-identical for any worker count.
CampaignResult run_campaign(const CampaignConfig& cfg);

/// Output directory resolution used by the campaign and the CLI.
std::filesystem::path resolve_outdir(const std::string& configured);

}  // namespace dtnperc
