#include "dtnperc/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace dtnperc {

namespace {
int max_bin_index(std::uint64_t s_max) {
  return std::bit_width(s_max) - 1;  // floor(log2(s_max))
}
}  // namespace

BinTable bin_sizes(std::span<const ClusterSample> samples, std::uint64_t s_max) {
  if (samples.empty()) throw std::invalid_argument("bin_sizes: empty sample list");
  if (s_max < 1) throw std::invalid_argument("bin_sizes: s_max must be >= 1");

  const int k_max = max_bin_index(s_max);
  std::vector<std::uint64_t> by_log(static_cast<std::size_t>(k_max) + 1, 0);

  BinTable table;
  table.s_max = s_max;
  table.n_samples = samples.size();
  for (const ClusterSample& s : samples) {
    if (s.size < 1 || s.size > s_max || (s.censored != (s.size == s_max)))
      throw std::invalid_argument("bin_sizes: sample inconsistent with s_max");
    if (s.censored) ++table.censored_count;
    ++by_log[static_cast<std::size_t>(std::bit_width(s.size)) - 1];
  }

  // Suffix sums turn per-magnitude counts into "size >= 2^k" counts.
  table.counts.assign(by_log.size(), 0);
  std::uint64_t running = 0;
  for (int k = k_max; k >= 0; --k) {
    running += by_log[static_cast<std::size_t>(k)];
    table.counts[static_cast<std::size_t>(k)] = running;
  }
  return table;
}

BinTable merge_bins(const BinTable& a, const BinTable& b) {
  if (a.s_max != b.s_max)
    throw std::invalid_argument("merge_bins: mismatched s_max");
  BinTable out = a;
  out.n_samples += b.n_samples;
  out.censored_count += b.censored_count;
  for (std::size_t k = 0; k < out.counts.size(); ++k) out.counts[k] += b.counts[k];
  return out;
}

std::vector<TailPoint> tail_statistic(const BinTable& bins,
                                      const UniversalExponents& exps) {
  if (bins.n_samples == 0 || bins.counts.empty())
    throw std::invalid_argument("tail_statistic: empty bin table");
  std::vector<TailPoint> stat;
  stat.reserve(bins.counts.size());
  const double n = static_cast<double>(bins.n_samples);
  for (std::size_t k = 0; k < bins.counts.size(); ++k) {
    TailPoint p;
    p.k = static_cast<int>(k);
    p.s = std::ldexp(1.0, p.k);
    p.x = std::pow(p.s, exps.sigma);
    p.y = (static_cast<double>(bins.counts[k]) / n) * std::pow(p.s, exps.tau - 2.0);
    stat.push_back(p);
  }
  return stat;
}

SlopeFit tail_slope(std::span<const TailPoint> stat, int k_min) {
  double sx = 0.0, sy = 0.0;
  int m = 0;
  for (const TailPoint& p : stat)
    if (p.k >= k_min && p.y > 0.0) {
      sx += p.x;
      sy += p.y;
      ++m;
    }
  if (m < 3)
    throw TooFewTailPoints(
        "tail_slope: fewer than 3 usable tail points; increase the sample "
        "count or lower k_min");

  const double mean_x = sx / m;
  const double mean_y = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const TailPoint& p : stat)
    if (p.k >= k_min && p.y > 0.0) {
      sxx += (p.x - mean_x) * (p.x - mean_x);
      sxy += (p.x - mean_x) * (p.y - mean_y);
    }

  SlopeFit fit;
  fit.points_used = m;
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (const TailPoint& p : stat)
    if (p.k >= k_min && p.y > 0.0) {
      const double resid = (p.y - mean_y) - fit.slope * (p.x - mean_x);
      rss += resid * resid;
    }
  fit.std_error = m > 2 ? std::sqrt(rss / ((m - 2) * sxx)) : 0.0;
  return fit;
}

EmpiricalCdf empirical_cdf(std::span<const ClusterSample> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_cdf: empty sample list");

  EmpiricalCdf cdf;
  std::vector<std::uint64_t> sizes;
  sizes.reserve(samples.size());
  std::uint64_t censored = 0;
  for (const ClusterSample& s : samples) {
    if (s.censored) {
      ++censored;
      cdf.s_max = std::max(cdf.s_max, s.size);
    } else {
      sizes.push_back(s.size);
    }
  }
  std::sort(sizes.begin(), sizes.end());

  const double n = static_cast<double>(samples.size());
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    ++cum;
    const bool last_of_value = (i + 1 == sizes.size()) || (sizes[i + 1] != sizes[i]);
    if (last_of_value)
      cdf.points.push_back({sizes[i] + 1, static_cast<double>(cum) / n});
  }
  cdf.censored_atom = static_cast<double>(censored) / n;
  return cdf;
}

double strength_estimate(std::span<const ClusterSample> samples) {
  if (samples.empty())
    throw std::invalid_argument("strength_estimate: empty sample list");
  std::uint64_t censored = 0;
  for (const ClusterSample& s : samples) censored += s.censored ? 1 : 0;
  return static_cast<double>(censored) / static_cast<double>(samples.size());
}

namespace {

EstimateProbe evaluate_probe(double eta, std::uint64_t initial_n,
                             const SearchConfig& cfg, const PointSampler& sampler,
                             std::uint64_t& call_counter) {
  std::vector<ClusterSample> samples = sampler(eta, initial_n, call_counter++);
  int doublings = 0;
  for (;;) {
    EstimateProbe probe;
    probe.eta = eta;
    probe.n_samples = samples.size();
    probe.strength = strength_estimate(samples);
    probe.slope = std::numeric_limits<double>::quiet_NaN();
    probe.slope_error = std::numeric_limits<double>::quiet_NaN();

    std::optional<SlopeFit> fit;
    try {
      const BinTable bins = bin_sizes(samples, cfg.s_max);
      fit = tail_slope(tail_statistic(bins, cfg.exponents), cfg.k_min);
    } catch (const TooFewTailPoints&) {
      // Treated like an insignificant slope: refine with more samples.
    }
    if (fit) {
      probe.slope = fit->slope;
      probe.slope_error = fit->std_error;
      if (std::abs(fit->slope) > cfg.significance_z * fit->std_error) {
        probe.verdict = fit->slope > 0.0 ? +1 : -1;
        return probe;
      }
    }
    if (doublings >= cfg.max_doublings) {
      probe.verdict = 0;
      return probe;
    }
    std::vector<ClusterSample> extra =
        sampler(eta, samples.size(), call_counter++);
    samples.insert(samples.end(), extra.begin(), extra.end());
    ++doublings;
  }
}

}  // namespace

EstimateResult estimate_eta_c(double gamma, const SearchConfig& cfg,
                              const PointSampler& sampler) {
  if (!(cfg.eta_lo > 0.0) || !(cfg.eta_hi > cfg.eta_lo))
    throw std::invalid_argument("estimate_eta_c: need 0 < eta_lo < eta_hi");
  if (cfg.samples_per_probe == 0)
    throw std::invalid_argument("estimate_eta_c: samples_per_probe must be >= 1");
  if (!(cfg.tolerance > 0.0))
    throw std::invalid_argument("estimate_eta_c: tolerance must be > 0");
  if (max_bin_index(cfg.s_max) < cfg.k_min + 2)
    throw std::invalid_argument(
        "estimate_eta_c: s_max leaves fewer than 3 bins above k_min");

  EstimateResult result;
  result.gamma = gamma;
  std::uint64_t call_counter = 0;

  const std::uint64_t endpoint_n =
      cfg.endpoint_samples != 0
          ? cfg.endpoint_samples
          : std::max<std::uint64_t>(500, cfg.samples_per_probe / 8);

  EstimateProbe lo_probe =
      evaluate_probe(cfg.eta_lo, endpoint_n, cfg, sampler, call_counter);
  lo_probe.role = "endpoint_lo";
  result.probes.push_back(lo_probe);
  EstimateProbe hi_probe =
      evaluate_probe(cfg.eta_hi, endpoint_n, cfg, sampler, call_counter);
  hi_probe.role = "endpoint_hi";
  result.probes.push_back(hi_probe);

  if (lo_probe.verdict == 0 || hi_probe.verdict == 0)
    throw BracketError(
        "estimate_eta_c: bracket endpoint stayed indeterminate at the full "
        "sample budget");
  if (lo_probe.verdict > 0 || hi_probe.verdict < 0)
    throw BracketError(
        "estimate_eta_c: initial bracket does not straddle the threshold");

  double lo = cfg.eta_lo;
  double hi = cfg.eta_hi;
  while (hi - lo > cfg.tolerance) {
    const double mid = 0.5 * (lo + hi);
    EstimateProbe probe =
        evaluate_probe(mid, cfg.samples_per_probe, cfg, sampler, call_counter);
    probe.role = "midpoint";
    result.probes.push_back(probe);
    if (probe.verdict > 0) {
      hi = mid;
    } else if (probe.verdict < 0) {
      lo = mid;
    } else {
      // Indistinguishable from critical at the full budget: take it.
      result.eta_lo = lo;
      result.eta_hi = hi;
      result.eta_c_hat = mid;
      result.stopped_on_indeterminate = true;
      return result;
    }
  }

  result.eta_lo = lo;
  result.eta_hi = hi;
  result.eta_c_hat = 0.5 * (lo + hi);
  return result;
}

}  // namespace dtnperc
