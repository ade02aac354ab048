#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtnperc/epidemic.hpp"

namespace dtnperc {

/// Universal cluster-size exponents of three-dimensional percolation,
/// adopted as constants for the directed model: the near-critical tail obeys
/// P(S >= s) ~ A s^(2-tau) f((eta - eta_c) s^sigma). They are configuration,
/// never fitted here.
struct UniversalExponents {
  double tau = 2.18906;
  double sigma = 0.4522;
};

/// Power-of-two tail bins: counts[k] is the number of samples with cluster
/// size >= 2^k, for k = 0..floor(log2(s_max)). Censored samples count as
/// size s_max, so they contribute to every bin with 2^k <= s_max.
struct BinTable {
  std::uint64_t n_samples = 0;
  std::uint64_t censored_count = 0;
  std::uint64_t s_max = 0;
  std::vector<std::uint64_t> counts;
};

/// Exact tail bins of a sample set. All samples must come from runs with the
/// same s_max; throws std::invalid_argument on an empty list or on samples
/// inconsistent with s_max.
BinTable bin_sizes(std::span<const ClusterSample> samples, std::uint64_t s_max);

/// Sums two disjoint campaigns' tables (same s_max required). Binning is
/// associative under this merge.
BinTable merge_bins(const BinTable& a, const BinTable& b);

/// One point of the rectified tail: y = (B_k / N) * (2^k)^(tau-2) plotted
/// against x = (2^k)^sigma. At the critical density y has a flat tail; the
/// sign of its slope in x classifies eta against eta_c.
struct TailPoint {
  int k = 0;
  double s = 0.0;  ///< 2^k
  double x = 0.0;
  double y = 0.0;
};

std::vector<TailPoint> tail_statistic(const BinTable& bins,
                                      const UniversalExponents& exps = {});

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  int points_used = 0;
};

struct TooFewTailPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares slope of y against x over the tail points with k >= k_min
/// and y > 0, with the standard error from the regression residuals.
/// Throws TooFewTailPoints when fewer than 3 points qualify (the cluster died
/// too early everywhere: increase N or lower k_min).
SlopeFit tail_slope(std::span<const TailPoint> stat, int k_min);

/// Right-continuous empirical distribution of the cluster size, as the
/// points (v+1, P(S <= v)) for each distinct uncensored size v. Censored
/// samples enter the denominator and accumulate as a separate atom at s_max;
/// the curve never extrapolates past s_max.
struct EmpiricalCdf {
  struct Point {
    std::uint64_t s = 0;
    double p_below = 0.0;  ///< P(S < s)
  };
  std::vector<Point> points;
  std::uint64_t s_max = 0;
  double censored_atom = 0.0;  ///< censored fraction, sitting at s = s_max
};

EmpiricalCdf empirical_cdf(std::span<const ClusterSample> samples);

/// Censored fraction: estimator of the percolation strength P(S = infinity),
/// valid above the threshold for large s_max and upper-biased at finite
/// s_max.
double strength_estimate(std::span<const ClusterSample> samples);

/// Draws `count` fresh cluster samples at the given reduced number density.
/// `salt` is distinct per invocation, so repeated calls extend a sample set
/// with independent, reproducible seeds.
using PointSampler = std::function<std::vector<ClusterSample>(
    double eta, std::uint64_t count, std::uint64_t salt)>;

struct SearchConfig {
  double eta_lo = 0.0;
  double eta_hi = 0.0;
  std::uint64_t samples_per_probe = 10000;
  /// Sample count for validating the initial bracket endpoints; 0 means
  /// samples_per_probe / 8 (at least 500). Endpoints sit far from the
  /// threshold, so a smaller N already gives a significant verdict.
  std::uint64_t endpoint_samples = 0;
  std::uint64_t s_max = 1 << 16;
  int k_min = 8;
  double significance_z = 2.0;
  double tolerance = 0.004;
  /// How many times an indeterminate probe may double its sample count.
  int max_doublings = 2;
  UniversalExponents exponents{};
};

struct EstimateProbe {
  double eta = 0.0;
  std::uint64_t n_samples = 0;
  double slope = 0.0;
  double slope_error = 0.0;
  int verdict = 0;  ///< -1 below threshold, +1 above, 0 indeterminate
  double strength = 0.0;
  std::string role;  ///< "endpoint_lo", "endpoint_hi" or "midpoint"
};

struct EstimateResult {
  double gamma = 0.0;
  double eta_lo = 0.0;  ///< final bracket, eta_lo < eta_c_hat < eta_hi
  double eta_hi = 0.0;
  double eta_c_hat = 0.0;
  /// True when the search stopped because the midpoint probe remained
  /// statistically indistinguishable from critical at the full sample
  /// budget; eta_c_hat is then that midpoint.
  bool stopped_on_indeterminate = false;
  std::vector<EstimateProbe> probes;
};

/// The initial bracket does not straddle the threshold (or an endpoint stayed
/// indeterminate at the full budget), so bisection cannot start.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bisection on eta, classifying each probe by the sign of the tail slope.
/// A bracket moves only on a significant verdict (|slope| > z * stderr);
/// otherwise the probe doubles its samples up to the budget. The search stops
/// when the bracket width reaches the tolerance (estimate = midpoint) or when
/// a fully-refined midpoint stays indeterminate (estimate = that midpoint,
/// which at that point is statistically indistinguishable from eta_c).
EstimateResult estimate_eta_c(double gamma, const SearchConfig& cfg,
                              const PointSampler& sampler);

}  // namespace dtnperc
