#include <CLI11.hpp>

#include "dtnperc/cli.hpp"

// Command-line front end: run samples, campaigns and threshold estimates, and
// emit plot-ready data files. Exit codes: 0 ok, 1 runtime failure, 2 usage or
// config error, 3 estimation bracket failure.

int main(int argc, char** argv) {
  using namespace dtnperc;

  CLI::App app{"Directed space-time continuum percolation simulator and "
               "threshold estimator for delay-tolerant networks"};
  app.require_subcommand(1);

  cli::SampleOptions sample_opt;
  CLI::App* sample = app.add_subcommand(
      "sample", "Run one cluster realization and print it as JSON");
  sample->add_option("--gamma", sample_opt.gamma, "Tilt ratio ell/d")->required();
  sample->add_option("--eta", sample_opt.eta, "Reduced number density")->required();
  sample->add_option("--seed", sample_opt.seed, "Random seed");
  sample->add_option("--smax", sample_opt.s_max, "Cluster size cap");
  sample->add_option("--trace", sample_opt.trace_path,
                     "Write the acquisition trace CSV to this path");

  std::string sweep_config;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run a sampling campaign from a key=value config file");
  sweep->add_option("config", sweep_config, "Campaign config file")->required();

  cli::EstimateOptions est_opt;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Bisect the critical density eta_c(gamma) by tail slopes");
  estimate->add_option("--gamma", est_opt.gamma, "Tilt ratio")->required();
  estimate->add_option("--eta-lo", est_opt.search.eta_lo, "Bracket lower end")
      ->required();
  estimate->add_option("--eta-hi", est_opt.search.eta_hi, "Bracket upper end")
      ->required();
  estimate->add_option("--samples", est_opt.search.samples_per_probe,
                       "Samples per midpoint probe");
  estimate->add_option("--endpoint-samples", est_opt.search.endpoint_samples,
                       "Samples per bracket endpoint (0: samples/8)");
  estimate->add_option("--smax", est_opt.search.s_max, "Cluster size cap");
  estimate->add_option("--kmin", est_opt.search.k_min,
                       "First tail bin used by the slope fit");
  estimate->add_option("--z", est_opt.search.significance_z,
                       "Significance threshold in slope standard errors");
  estimate->add_option("--tol", est_opt.search.tolerance,
                       "Stop when the bracket width reaches this");
  estimate->add_option("--max-doublings", est_opt.search.max_doublings,
                       "Sample-doubling budget for indeterminate probes");
  estimate->add_option("--seed", est_opt.master_seed, "Master seed");
  estimate->add_option("--workers", est_opt.workers,
                       "Worker threads (0: hardware)");
  estimate->add_option("--out", est_opt.out_path,
                       "Write the estimate JSON here instead of stdout");

  cli::FluidOptions fluid_opt;
  double fluid_gamma = 0.0, fluid_mx = 0.0, fluid_mx2 = 0.0;
  CLI::App* fluid = app.add_subcommand(
      "fluid", "Closed-form fluid bound / renewal threshold");
  CLI::Option* og = fluid->add_option("--gamma", fluid_gamma, "Tilt ratio");
  CLI::Option* om = fluid->add_option("--mean-x", fluid_mx, "E[X]");
  CLI::Option* om2 = fluid->add_option("--mean-x2", fluid_mx2, "E[X^2]");

  cli::PlotDataOptions plot_opt;
  CLI::App* plotdata = app.add_subcommand(
      "plotdata", "Emit the two-curve critical mean node degree CSV");
  plotdata->add_option("--estimates", plot_opt.estimates_dir,
                       "Directory of estimate JSON documents");
  plotdata->add_option("--table", plot_opt.table_csv,
                       "CSV with gamma,eta_c columns");
  plotdata->add_option("--out", plot_opt.out_path,
                       "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsageError;
  }

  if (sample->parsed()) return cli::cmd_sample(sample_opt);
  if (sweep->parsed()) return cli::cmd_sweep(sweep_config);
  if (estimate->parsed()) return cli::cmd_estimate(est_opt);
  if (fluid->parsed()) {
    if (og->count() > 0) fluid_opt.gamma = fluid_gamma;
    if (om->count() > 0) fluid_opt.mean_x = fluid_mx;
    if (om2->count() > 0) fluid_opt.mean_x2 = fluid_mx2;
    return cli::cmd_fluid(fluid_opt);
  }
  if (plotdata->parsed()) return cli::cmd_plotdata(plot_opt);
  return cli::kUsageError;
}
