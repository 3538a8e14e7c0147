// ghssm: simulate, filter, validate and downsample from the command line.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ghssm/cli/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
  std::optional<double> budget;
  std::optional<int> burn_in;
};

void add_common(CLI::App* cmd, Common& c, bool model_flags) {
  cmd->add_option("--config", c.config, "key = value configuration file");
  cmd->add_option("--seed", c.seed, "random seed (overrides LEVY_SSM_SEED and the config)");
  if (model_flags) {
    cmd->add_option("--iters", c.iters, "MH chain length per observation");
    cmd->add_option("--budget", c.budget, "Poisson epoch ceiling per unit time (gamma_max)");
    cmd->add_option("--burn-in", c.burn_in, "chain entries discarded before collapsing");
  }
}

ghssm::io::RunConfig resolve(const Common& c) {
  ghssm::io::RunConfig cfg;
  if (!c.config.empty()) cfg = ghssm::io::load_config_file(c.config);
  cfg.seed = ghssm::io::resolve_seed(c.seed, cfg.seed);
  if (c.iters) cfg.n_iter = *c.iters;
  if (c.budget) cfg.gamma_max = *c.budget;
  if (c.burn_in) cfg.burn_in = *c.burn_in;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ghssm;
  CLI::App app{"GH Levy-driven state-space simulation and sequential MCMC filtering"};
  app.require_subcommand(1);

  Common sim_c, fil_c, val_c;
  cli::SimulateArgs sim;
  cli::FilterArgs fil;
  cli::ValidateArgs val;
  cli::DownsampleArgs ds;

  auto* s = app.add_subcommand("simulate", "simulate a Langevin path and noisy observations");
  add_common(s, sim_c, true);
  s->add_option("--out", sim.out, "observation CSV (time,y)");
  s->add_option("--truth", sim.truth, "state CSV (time,x,xdot); default <out>.truth.csv");
  s->add_option("--jumps", sim.jumps, "jump listing CSV (interval,time,z)");
  s->add_option("--times", sim.times, "CSV with a time column to use instead of an even grid");

  auto* f = app.add_subcommand("filter", "run the sequential MCMC filter on a series");
  add_common(f, fil_c, true);
  f->add_option("input", fil.input, "series CSV (time plus y/value/price)")->required();
  f->add_option("--out", fil.out, "filtered output CSV");
  f->add_option("--svg", fil.svg, "write an SVG plot of the filtered state");
  f->add_option("--truth", fil.truth, "truth CSV overlaid on the SVG");

  auto* v = app.add_subcommand("validate", "run the sampler and moment self-checks");
  add_common(v, val_c, true);
  v->add_option("--out", val.out, "JSON report path (default stdout)");

  auto* d = app.add_subcommand("downsample", "keep every k-th row of a series");
  d->add_option("input", ds.input, "series CSV")->required();
  d->add_option("-k", ds.k, "keep rows 0, k, 2k, ...")->required();
  d->add_option("--out", ds.out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  try {
    if (*s) return cli::cmd_simulate(resolve(sim_c), sim);
    if (*f) return cli::cmd_filter(resolve(fil_c), fil);
    if (*v) return cli::cmd_validate(resolve(val_c), val);
    if (*d) return cli::cmd_downsample(ds);
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}
