#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dgks/run.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string mode;
  int workers = 0;
  long long seed = -1;
  std::string out;
  int verbosity = 0;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("-w,--workers", o.workers, "worker threads (overrides DGKS_WORKERS and the config)")
      ->check(CLI::PositiveNumber);
  app->add_option("-s,--seed", o.seed, "random seed override")->check(CLI::NonNegativeNumber);
  app->add_option("-o,--out", o.out, "output directory override");
  app->add_flag("-v,--verbose", o.verbosity, "print SCF progress (repeat for more)");
}

dgks::RunConfig configure(const Overrides& o) {
  dgks::RunConfig c = dgks::load_config(o.config);
  if (!o.mode.empty()) c.mode = o.mode;
  if (const char* env = std::getenv("DGKS_WORKERS")) {
    const int w = std::atoi(env);
    if (w < 1) throw dgks::ConfigError("DGKS_WORKERS must be a positive integer");
    c.workers = w;
  }
  if (o.workers > 0) c.workers = o.workers;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out.empty()) c.output = o.out;
  dgks::validate(c);
  return c;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    if (used != item.size()) throw dgks::ConfigError("bad sweep value '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw dgks::ConfigError("no sweep values given");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive local basis DG Kohn-Sham solver with a planewave reference"};
  app.require_subcommand(1);

  Overrides run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run one global, dg or compare calculation");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("-m,--mode", run_opts.mode, "global | dg | compare")
      ->check(CLI::IsMember({"global", "dg", "compare"}));

  Overrides sweep_opts;
  std::string parameter;
  std::string values;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "repeat compare runs over one DG parameter");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("-p,--parameter", parameter, "jk | buffer | alpha")
      ->required()
      ->check(CLI::IsMember({"jk", "buffer", "alpha"}));
  sweep_cmd->add_option("--values", values, "comma separated values, e.g. 20,40,80")->required();

  std::string check_path;
  CLI::App* check_cmd = app.add_subcommand("check", "validate a configuration and print it with defaults");
  check_cmd->add_option("config", check_path, "configuration file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check_cmd) {
      const dgks::RunConfig c = dgks::load_config(check_path);
      std::cout << dgks::config_to_json(c).dump(2) << "\n";
      return 0;
    }
    if (*run_cmd) {
      const dgks::RunConfig c = configure(run_opts);
      dgks::DGSystem a;
      dgks::RunHooks hooks;
      hooks.log = run_opts.verbosity > 0 ? &std::cerr : nullptr;
      hooks.stiffness_out = c.dump_stiffness ? &a : nullptr;
      const dgks::ComparisonReport r = dgks::run(c, hooks);
      dgks::write_outputs(c.output, c, r, c.dump_stiffness ? &a : nullptr);
      std::cout << dgks::summary_text(c, r);
      return 0;
    }
    const dgks::RunConfig c = configure(sweep_opts);
    dgks::RunHooks hooks;
    hooks.log = sweep_opts.verbosity > 0 ? &std::cerr : nullptr;
    const dgks::SweepTable t = dgks::sweep(c, dgks::parse_sweep_parameter(parameter), parse_values(values), hooks);
    dgks::write_sweep(c.output, t);
    dgks::write_sweep_table(std::cout, t);
    if (t.fit) std::cout << "log-log slope " << t.fit->slope << " over " << t.fit->points << " points\n";
    return 0;
  } catch (const dgks::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
