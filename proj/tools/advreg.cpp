// advreg: nonparametric regression under adversarial input perturbations.
// Fits piecewise local polynomial and bandwidth-adaptive estimators, runs
// Monte Carlo risk sweeps, and emits plot-ready CSV/JSON tables.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "advreg/common.hpp"
#include "advreg/config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitResource = 4;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> jobs;
  bool no_timestamp = false;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (JSON)");
  cmd->add_option("--seed", flags.seed, "seed override");
  cmd->add_option("--out", flags.out, "output path (default stdout)");
  cmd->add_option("--format", flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--jobs", flags.jobs, "worker threads (0 = all cores)");
  cmd->add_flag("--no-timestamp", flags.no_timestamp, "omit the timestamp header line");
}

advreg::ExperimentConfig load(const Flags& flags) {
  advreg::ExperimentConfig config = flags.config_path.empty()
                                        ? advreg::ExperimentConfig{}
                                        : advreg::ExperimentConfig::from_file(flags.config_path);
  // flags win over file values
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) config.out = *flags.out;
  if (flags.format) config.format = *flags.format;
  if (flags.jobs) config.jobs = *flags.jobs;
  if (flags.no_timestamp) config.timestamp = false;
  return config;
}

int run(const Flags& flags, const std::function<void(const advreg::ExperimentConfig&,
                                                     std::ostream&, std::ostream&)>& body) {
  try {
    advreg::ExperimentConfig config = load(flags);
    if (config.out.empty()) {
      body(config, std::cout, std::cerr);
    } else {
      std::ofstream out(config.out);
      if (!out) throw advreg::ConfigError("cannot open output path '" + config.out + "'");
      body(config, out, std::cerr);
    }
    return 0;
  } catch (const advreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const advreg::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarially robust nonparametric regression toolkit"};
  app.require_subcommand(1);

  Flags flags;
  auto* fit = app.add_subcommand("fit", "fit once and write per-cell coefficients");
  auto* evaluate = app.add_subcommand("evaluate", "estimate the risk of one configuration");
  auto* sweep = app.add_subcommand("sweep", "risk table over a (n, r, beta, q) grid");
  auto* adapt = app.add_subcommand("adapt", "fit the adaptive estimator and report bandwidths");
  auto* demo = app.add_subcommand("demo-lower-bound",
                                  "hard-instance deviation, packing, and risk report");
  auto* dump = app.add_subcommand("dump-config", "print the fully resolved config");
  for (auto* cmd : {fit, evaluate, sweep, adapt, demo, dump}) add_common_flags(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return run(flags, advreg::cmd_fit);
  if (evaluate->parsed()) return run(flags, advreg::cmd_evaluate);
  if (sweep->parsed()) return run(flags, advreg::cmd_sweep);
  if (adapt->parsed()) return run(flags, advreg::cmd_adapt);
  if (demo->parsed()) return run(flags, advreg::cmd_demo_lower_bound);
  if (dump->parsed())
    return run(flags, [](const advreg::ExperimentConfig& c, std::ostream& out, std::ostream&) {
      advreg::cmd_dump_config(c, out);
    });
  return kExitConfig;
}
