#include "dtnperc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "dtnperc/campaign.hpp"
#include "dtnperc/field.hpp"
#include "dtnperc/fluid.hpp"
#include "dtnperc/io.hpp"
#include "dtnperc/model.hpp"

namespace dtnperc::cli {

using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << text;
}

}  // namespace

int cmd_sample(const SampleOptions& opt) {
  try {
    const ModelParams params = derive_params(opt.gamma, opt.eta);
    if (opt.s_max < 1) {
      std::cerr << "sample: --smax must be >= 1\n";
      return kUsageError;
    }

    FieldWorld world(params, opt.seed);
    Trace trace;
    ClusterSample sample =
        grow_cluster(world, opt.s_max, opt.trace_path.empty() ? nullptr : &trace);
    sample.seed = opt.seed;

    if (!opt.trace_path.empty()) io::write_trace_csv(opt.trace_path, trace);
    std::cout << io::cluster_sample_json(sample, opt.gamma, opt.eta, opt.s_max);
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sample: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "sample: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_sweep(const std::string& config_path) {
  CampaignConfig cfg;
  try {
    cfg = parse_campaign_config(config_path);
    if (cfg.etas.empty()) throw ConfigError(config_path + ": empty eta list");
    for (const double eta : cfg.etas) derive_params(cfg.gamma, eta);
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    const CampaignResult result = run_campaign(cfg);
    const std::filesystem::path outdir = resolve_outdir(cfg.outdir);

    std::ofstream summary(outdir / "summary.csv");
    if (!summary)
      throw std::runtime_error("cannot open for writing: " +
                               (outdir / "summary.csv").string());
    summary << "# dtnperc-schema: summary v1\n";
    summary << "point,gamma,eta,n_samples,censored,strength,mean_size\n";

    for (std::size_t p = 0; p < cfg.etas.size(); ++p) {
      const PointResult& point = result.at({cfg.gamma, cfg.etas[p]});
      // Derived files share the record file's pointNN prefix.
      std::string base = point.records_path.string();
      base.erase(base.rfind(".samples.csv"));

      io::write_cdf_csv(base + ".cdf.csv", empirical_cdf(point.samples),
                        point.samples.size());
      io::write_bins_csv(base + ".bins.csv", point.bins);
      io::write_tailstat_csv(base + ".tailstat.csv", tail_statistic(point.bins),
                             UniversalExponents{});

      summary << p << ',' << io::format_double(point.gamma) << ','
              << io::format_double(point.eta) << ',' << point.samples.size() << ','
              << point.bins.censored_count << ',' << io::format_double(point.strength)
              << ',' << io::format_double(point.mean_size) << '\n';
      std::cout << "point " << p << ": gamma=" << point.gamma
                << " eta=" << point.eta << " strength=" << point.strength
                << " mean_size=" << point.mean_size << '\n';
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_estimate(const EstimateOptions& opt) {
  try {
    derive_params(opt.gamma, 0.1);  // validates gamma early
    const PointSampler sampler = make_point_sampler(opt.gamma, opt.search.s_max,
                                                    opt.master_seed, opt.workers);
    const EstimateResult result = estimate_eta_c(opt.gamma, opt.search, sampler);
    emit(io::estimate_result_json(result), opt.out_path);
    return kOk;
  } catch (const BracketError& e) {
    std::cerr << "estimate: " << e.what() << '\n';
    return kBracketError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "estimate: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "estimate: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_fluid(const FluidOptions& opt) {
  const bool have_moments = opt.mean_x.has_value() || opt.mean_x2.has_value();
  if (opt.gamma.has_value() == have_moments) {
    std::cerr << "fluid: pass either --gamma or both --mean-x and --mean-x2\n";
    return kUsageError;
  }
  try {
    json doc;
    doc["schema"] = "dtnperc-fluid v1";
    if (opt.gamma) {
      doc["gamma"] = *opt.gamma;
      doc["nu_c_fluid"] = fluid_bound_nu(*opt.gamma);
      doc["eta_c_fluid"] = fluid_bound_eta(*opt.gamma);
    } else {
      if (!opt.mean_x || !opt.mean_x2) {
        std::cerr << "fluid: --mean-x and --mean-x2 must be given together\n";
        return kUsageError;
      }
      const TransitionMoments m{*opt.mean_x, *opt.mean_x2};
      doc["mean_x"] = m.mean_x;
      doc["mean_x2"] = m.mean_x2;
      doc["critical_plane_density_times_d"] = renewal_threshold(m);
    }
    std::cout << doc.dump(2) << '\n';
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "fluid: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "fluid: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_plotdata(const PlotDataOptions& opt) {
  if (opt.estimates_dir.empty() == opt.table_csv.empty()) {
    std::cerr << "plotdata: pass exactly one of --estimates or --table\n";
    return kUsageError;
  }
  try {
    std::vector<io::ThresholdPoint> points;
    if (!opt.table_csv.empty()) {
      points = io::read_threshold_csv(opt.table_csv);
    } else {
      for (const auto& entry :
           std::filesystem::directory_iterator(opt.estimates_dir)) {
        if (entry.path().extension() != ".json") continue;
        const EstimateResult r = io::read_estimate_json(entry.path());
        points.push_back({r.gamma, r.eta_c_hat});
      }
      if (points.empty())
        throw std::invalid_argument("no estimate documents in " +
                                    opt.estimates_dir);
    }
    if (opt.out_path.empty())
      io::write_threshold_curve_csv(std::cout, std::move(points));
    else
      io::write_threshold_curve_csv(opt.out_path, std::move(points));
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "plotdata: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "plotdata: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace dtnperc::cli
