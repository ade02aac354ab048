#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dtnperc/campaign.hpp"
#include "dtnperc/epidemic.hpp"
#include "dtnperc/field.hpp"
#include "dtnperc/fluid.hpp"
#include "dtnperc/geometry.hpp"
#include "dtnperc/model.hpp"
#include "dtnperc/rng.hpp"
#include "dtnperc/stats.hpp"
#include "oracles.hpp"

// End-to-end acceptance checks at desk scale. Each criterion prints exactly
// one PASS/FAIL line; the Monte Carlo groups report their measurements too,
// so a red line comes with the numbers that produced it.

using namespace dtnperc;
namespace t = dtnperc::testing;

namespace {

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int number, const std::string& name, bool pass, const std::string& details) {
  std::printf("ACCEPTANCE %d [%s]: %s%s%s\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", details.empty() ? "" : " | ",
              details.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, "criterion " << number << " (" << name << "): " << details);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace

TEST_CASE("geometry-oracle") {
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t pairs = 0, contacts = 0, existence_mismatch = 0;
  double worst_endpoint_error = 0.0;

  for (const double gamma : {0.0, 0.5, 1.0, 4.0, 16.0}) {
    const ModelParams p = derive_params(gamma, 0.2);
    RandomStream s(derive_key({0xACCE97, static_cast<std::uint64_t>(gamma * 16)}));
    for (int trial = 0; trial < 2000; ++trial) {
      const auto draw = [&](double spread) {
        Cylinder c;
        c.t_arrive = spread * (s.next_unit() - 0.5) * 2.0;
        c.p0 = Eigen::Vector2d{spread * (s.next_unit() - 0.5) * 2.0,
                               spread * (s.next_unit() - 0.5) * 2.0};
        s.next_heading(c.heading.x(), c.heading.y());
        return c;
      };
      const Cylinder a = draw(1.2);
      const Cylinder b = draw(1.2);
      ++pairs;

      const auto iv = contact_interval(a, b, p);
      const auto scan = t::scan_contact(a, b, p);
      if (iv.has_value() != scan.exists) {
        ++existence_mismatch;
        continue;
      }
      if (iv) {
        ++contacts;
        worst_endpoint_error =
            std::max({worst_endpoint_error, std::abs(iv->t_begin - scan.t_begin),
                      std::abs(iv->t_end - scan.t_end)});
      }
    }
  }

  const double secs = elapsed_since(t0);
  const bool pass = pairs >= 10000 && existence_mismatch == 0 &&
                    worst_endpoint_error < 2e-5 && contacts > 500 && secs < 60.0;
  report(1, "geometry-oracle", pass,
         fmt("pairs=%llu contacts=%llu existence_mismatches=%llu "
             "worst_endpoint_error=%.3g runtime=%.1fs",
             static_cast<unsigned long long>(pairs),
             static_cast<unsigned long long>(contacts),
             static_cast<unsigned long long>(existence_mismatch),
             worst_endpoint_error, secs));
}

TEST_CASE("thresholds") {
  struct Case {
    double gamma;
    double reference;  // published threshold
    double tolerance;  // desk-scale reproduction tolerance
    double lo, hi;     // initial bracket
    double search_tol;
  };
  // Brackets sit asymmetrically around the references: probes above the
  // threshold dominate the runtime, so the upper margins stay modest.
  const std::vector<Case> cases{
      {0.0, 0.3788, 0.010, 0.370, 0.394, 0.004},
      {1.0, 0.2825, 0.010, 0.272, 0.294, 0.004},
      {2.0, 0.2189, 0.010, 0.209, 0.231, 0.004},
      {8.0, 0.0836, 0.005, 0.0755, 0.0915, 0.002},
      {16.0, 0.04325, 0.005, 0.0390, 0.0490, 0.002},
  };

  std::map<double, EstimateResult> estimates;
  bool reproduced = true;
  std::string repro_details;
  for (const Case& c : cases) {
    SearchConfig cfg;
    cfg.eta_lo = c.lo;
    cfg.eta_hi = c.hi;
    cfg.samples_per_probe = 10000;  // desk scale
    cfg.endpoint_samples = 1250;
    cfg.s_max = std::uint64_t{1} << 16;
    cfg.k_min = 8;
    cfg.significance_z = 2.0;
    cfg.tolerance = c.search_tol;
    cfg.max_doublings = 2;

    const auto master = static_cast<std::uint64_t>(1000 + 16 * c.gamma);
    const PointSampler sampler = make_point_sampler(c.gamma, cfg.s_max, master, 0);

    const auto t0 = std::chrono::steady_clock::now();
    const EstimateResult r = estimate_eta_c(c.gamma, cfg, sampler);
    const double secs = elapsed_since(t0);
    estimates.emplace(c.gamma, r);

    const bool within = std::abs(r.eta_c_hat - c.reference) <= c.tolerance;
    reproduced = reproduced && within;
    const std::string line =
        fmt("gamma=%g eta_c_hat=%.5f reference=%.5f bracket=[%.5f,%.5f] "
            "probes=%zu runtime=%.0fs%s",
            c.gamma, r.eta_c_hat, c.reference, r.eta_lo, r.eta_hi,
            r.probes.size(), secs, within ? "" : " OUT OF TOLERANCE");
    std::printf("  threshold %s\n", line.c_str());
    std::fflush(stdout);
    repro_details += (repro_details.empty() ? "" : "; ") +
                     fmt("g%g: %.5f vs %.5f", c.gamma, r.eta_c_hat, c.reference);
  }

  const double eta0 = estimates.at(0.0).eta_c_hat;
  report(2, "undirected-lower-bound", eta0 > 0.3312,
         fmt("eta_c_hat(0)=%.5f must exceed 0.3312", eta0));

  report(3, "table-reproduction", reproduced, repro_details);

  const double ratio = estimates.at(8.0).eta_c_hat / estimates.at(16.0).eta_c_hat;
  report(4, "scaling-law", ratio >= 1.7 && ratio <= 2.3,
         fmt("eta_c(8)/eta_c(16)=%.3f must lie in [1.7, 2.3]", ratio));

  // Monotonicity of the estimated thresholds across the grid (mobility only
  // ever helps).
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (const auto& [gamma, r] : estimates) {
    monotone = monotone && r.eta_c_hat <= prev + 1e-12;
    prev = r.eta_c_hat;
  }
  CHECK_MESSAGE(monotone, "estimated thresholds must be nonincreasing in gamma");

  bool fluid_ok = true;
  std::string fluid_details;
  for (const double gamma : {8.0, 16.0}) {
    const double nu_hat = 4.0 * estimates.at(gamma).eta_c_hat;
    const double fb = fluid_bound_nu(gamma);
    const double rel = std::abs(fb - nu_hat) / nu_hat;
    fluid_ok = fluid_ok && rel <= 0.10;
    fluid_details += fmt("g%g: fluid=%.5f 4*eta_c=%.5f rel=%.1f%%; ", gamma, fb,
                         nu_hat, 100.0 * rel);
  }
  double worst_renewal = 0.0;
  for (const double gamma : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
    const ModelParams p = derive_params(gamma, 0.1);
    const double nu_from_renewal =
        renewal_threshold({p.ell, p.ell * p.ell}) * std::numbers::pi * p.d;
    worst_renewal = std::max(
        worst_renewal, std::abs(nu_from_renewal - fluid_bound_nu(gamma)) /
                           fluid_bound_nu(gamma));
  }
  fluid_ok = fluid_ok && worst_renewal <= 1e-12;
  report(7, "fluid-consistency", fluid_ok,
         fluid_details + fmt("renewal-vs-fluid rel err=%.2g", worst_renewal));
}

TEST_CASE("strength") {
  const ModelParams p = derive_params(0.0, 0.383);
  const std::uint64_t s_max = std::uint64_t{1} << 17;
  const auto seed_of = [](std::uint64_t i) {
    return derive_key({0x57E9, 0, i, 0xE5});
  };
  const auto t0 = std::chrono::steady_clock::now();
  const auto super = parallel_samples(p, s_max, seed_of, 5000, 0);
  const double strength = strength_estimate(super);
  const bool super_ok = strength >= 0.15 && strength <= 0.25;
  report(5, "strength-supercritical", super_ok,
         fmt("gamma=0 eta=0.383 censored fraction=%.4f target [0.15, 0.25] "
             "runtime=%.0fs",
             strength, elapsed_since(t0)));

  const ModelParams sub_p = derive_params(0.0, 0.365);
  const auto sub_seed = [](std::uint64_t i) {
    return derive_key({0x57E9, 1, i, 0xE5});
  };
  const auto sub = parallel_samples(sub_p, s_max, sub_seed, 5000, 0);
  const double sub_strength = strength_estimate(sub);
  std::uint64_t below = 0;
  for (const ClusterSample& s : sub) below += (!s.censored && s.size <= 30000) ? 1 : 0;
  const double cdf_at_3e4 = static_cast<double>(below) / static_cast<double>(sub.size());
  const bool sub_ok = sub_strength < 0.005 && cdf_at_3e4 >= 0.999;
  report(5, "strength-subcritical", sub_ok,
         fmt("gamma=0 eta=0.365 censored fraction=%.5f (<0.005) "
             "P(S<=3e4)=%.5f (>=0.999)",
             sub_strength, cdf_at_3e4));
}

TEST_CASE("tail-flatness") {
  const std::uint64_t s_max = std::uint64_t{1} << 16;
  const auto probe = [&](double eta, std::uint64_t salt) {
    const ModelParams p = derive_params(0.0, eta);
    const auto seed_of = [salt](std::uint64_t i) {
      return derive_key({0xF1A7, salt, i, 0xE5});
    };
    const auto samples = parallel_samples(p, s_max, seed_of, 10000, 0);
    return tail_slope(tail_statistic(bin_sizes(samples, s_max)), 8);
  };

  const auto t0 = std::chrono::steady_clock::now();
  const SlopeFit below = probe(0.375, 0);
  const SlopeFit above = probe(0.383, 1);
  const double secs = elapsed_since(t0);

  const bool pass = below.slope < 0.0 &&
                    std::abs(below.slope) > 2.0 * below.std_error &&
                    above.slope > 0.0 &&
                    std::abs(above.slope) > 2.0 * above.std_error;
  report(6, "tail-flatness", pass,
         fmt("eta=0.375: slope=%.3g (z=%.1f); eta=0.383: slope=%.3g (z=%.1f); "
             "runtime=%.0fs",
             below.slope, below.slope / below.std_error, above.slope,
             above.slope / above.std_error, secs));
}

TEST_CASE("determinism") {
  namespace fs = std::filesystem;
  CampaignConfig cfg;
  cfg.gamma = 0.0;
  cfg.etas = {0.37};
  cfg.samples = 400;
  cfg.s_max = std::uint64_t{1} << 14;
  cfg.master_seed = 99;

  const auto run_with = [&](int workers, const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("dtnperc_acc_" + tag);
    fs::remove_all(dir);
    CampaignConfig c = cfg;
    c.workers = workers;
    c.outdir = dir.string();
    return run_campaign(c);
  };
  const CampaignResult r1 = run_with(1, "w1");
  const CampaignResult r8 = run_with(8, "w8");

  bool identical = true;
  for (const auto& [key, p1] : r1) {
    const PointResult& p8 = r8.at(key);
    identical = identical && p1.bins.counts == p8.bins.counts &&
                p1.bins.censored_count == p8.bins.censored_count &&
                p1.bins.n_samples == p8.bins.n_samples;
    std::ifstream f1(p1.records_path), f8(p8.records_path);
    std::ostringstream s1, s8;
    s1 << f1.rdbuf();
    s8 << f8.rdbuf();
    identical = identical && s1.str() == s8.str();
  }

  const ModelParams thin_p = derive_params(0.0, 0.36);
  std::uint64_t violations = 0, nontrivial = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const std::uint64_t seed = derive_key({0xC0DE, i});
    const ClusterSample full = sample_cluster(thin_p, seed, 4096);
    const ClusterSample thin = sample_cluster(thin_p, seed, 4096, Thinning{0.9, 3});
    if (thin.size > full.size) ++violations;
    if (full.size > 1) ++nontrivial;
  }

  const bool pass = identical && violations == 0 && nontrivial > 500;
  report(8, "determinism-and-coupling", pass,
         fmt("worker-1-vs-8 byte-identical=%d coupling_violations=%llu "
             "nontrivial_pairs=%llu",
             identical ? 1 : 0, static_cast<unsigned long long>(violations),
             static_cast<unsigned long long>(nontrivial)));
}

TEST_CASE("performance") {
  // Seed 20 is a frozen draw whose cluster reaches the cap; a subcritical
  // draw would make this guard vacuous.
  const ModelParams p = derive_params(0.0, 0.379);
  const std::uint64_t s_max = std::uint64_t{1} << 20;
  const auto t0 = std::chrono::steady_clock::now();
  FieldWorld world(p, 20);
  const ClusterSample s = grow_cluster(world, s_max);
  const double secs = elapsed_since(t0);

  const bool censored_run = s.censored && s.size == s_max;
  const bool in_time = secs <= 60.0;
  const bool memory_bound = world.populated_box_count() <= 27 * s.size;
  report(9, "performance-guard", censored_run && in_time && memory_bound,
         fmt("size=%llu censored=%d runtime=%.2fs (<=60) populated_boxes=%zu "
             "(<= 27*size=%llu)",
             static_cast<unsigned long long>(s.size), s.censored ? 1 : 0, secs,
             world.populated_box_count(),
             static_cast<unsigned long long>(27 * s.size)));
}

TEST_CASE("reference-slopes") {
  // Slope signs bracketing the gamma = 1 threshold at the published setting.
  const std::uint64_t s_max = std::uint64_t{1} << 16;
  const auto probe = [&](double eta, std::uint64_t salt) {
    const ModelParams p = derive_params(1.0, eta);
    const auto seed_of = [salt](std::uint64_t i) {
      return derive_key({0x9A9E, salt, i, 0xE5});
    };
    const auto samples = parallel_samples(p, s_max, seed_of, 20000, 0);
    return tail_slope(tail_statistic(bin_sizes(samples, s_max)), 8);
  };
  const SlopeFit below = probe(0.279, 0);
  const SlopeFit above = probe(0.286, 1);
  std::printf("  gamma=1 slopes: eta=0.279 slope=%.3g (z=%.1f), eta=0.286 "
              "slope=%.3g (z=%.1f)\n",
              below.slope, below.slope / below.std_error, above.slope,
              above.slope / above.std_error);
  CHECK(below.slope < 0.0);
  CHECK(std::abs(below.slope) > 2.0 * below.std_error);
  CHECK(above.slope > 0.0);
  CHECK(std::abs(above.slope) > 2.0 * above.std_error);
}
