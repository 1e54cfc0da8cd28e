// Command-line driver: run one experiment, sweep one key, or validate a config.
//
// Exit codes: 0 converged, 1 not converged or solver failure, 2 bad config.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pint/experiment.hpp"
#include "pint/log.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "key = value config file");
  cmd->add_option("-s,--set", args.overrides, "override, as key=value")->take_all();
  cmd->add_option("-o,--output", args.output, "output directory");
  cmd->add_option("-w,--workers", args.workers, "worker threads")->check(CLI::PositiveNumber);
}

pint::KeyValues gather(const CommonArgs& args) {
  pint::KeyValues kv;
  if (!args.config_path.empty()) kv = pint::read_config_file(args.config_path);
  for (const auto& o : args.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw pint::ConfigError({"override '" + o + "' is not key=value"});
    kv.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  if (!args.output.empty()) kv.emplace_back("output", args.output);
  if (args.workers > 0) kv.emplace_back("workers", std::to_string(args.workers));
  return kv;
}

pint::ExperimentConfig load(const CommonArgs& args) {
  pint::ExperimentConfig cfg = pint::parse_config(gather(args));
  pint::apply_environment(cfg);
  return cfg;
}

void print_summary(const pint::RunSummary& s) {
  const auto& r = s.report;
  std::printf("problem %s  n_x %d  n_t %d  alpha %g\n", pint::to_string(s.config.problem).c_str(), s.config.n_x(),
              s.config.n_t(), s.config.alpha);
  std::printf("  e0 = %.6e\n", r.initial_error);
  for (std::size_t k = 0; k < r.errors.size(); ++k) {
    std::printf("  k = %2zu  error = %.6e", k + 1, r.errors[k]);
    if (k < r.inner_iterations.size()) std::printf("  inner = %d", r.inner_iterations[k]);
    std::printf("\n");
  }
  if (s.bound) std::printf("  rho = %.6e (%s)\n", s.bound->rho, s.bound->valid ? "valid" : "vacuous");
  if (s.health.oracle_difference) std::printf("  oracle difference = %.3e\n", *s.health.oracle_difference);
  std::printf("  mass drift %.3e  max energy increase %.3e  imag residue %.3e\n", s.mass_drift,
              s.max_energy_increase, s.health.imag_residue_max);
  std::printf("  %s after %d iterations (%.2f s)\n", r.converged ? "converged" : "NOT converged", r.iterations,
              r.wallclock);
  for (const auto& w : s.written) std::printf("  wrote %s\n", w.c_str());
}

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : list) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-in-time solvers for fourth-order parabolic problems"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, check_args;
  auto* run = app.add_subcommand("run", "solve one configuration");
  add_common(run, run_args);

  auto* sweep = app.add_subcommand("sweep", "vary one key over a list of values");
  add_common(sweep, sweep_args);
  std::string sweep_key, sweep_values;
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  auto* check = app.add_subcommand("check", "validate a configuration");
  add_common(check, check_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*check) {
      const auto cfg = load(check_args);
      for (const auto& [k, v] : pint::echo(cfg)) std::printf("%s = %s\n", k.c_str(), v.c_str());
      return kExitConverged;
    }
    if (*run) {
      const auto cfg = load(run_args);
      const auto s = pint::run_experiment(cfg);
      print_summary(s);
      return s.report.converged ? kExitConverged : kExitNotConverged;
    }
    // sweep: validate every point before running any of them.
    std::vector<pint::ExperimentConfig> configs;
    const auto values = split(sweep_values);
    if (values.empty()) throw pint::ConfigError({"--values is empty"});
    for (const auto& v : values) {
      CommonArgs a = sweep_args;
      a.overrides.push_back(sweep_key + "=" + v);
      a.overrides.push_back("tag=" + sweep_key + "_" + v);
      configs.push_back(load(a));
    }
    bool all = true;
    for (const auto& cfg : configs) {
      const auto s = pint::run_experiment(cfg);
      print_summary(s);
      all = all && s.report.converged;
    }
    return all ? kExitConverged : kExitNotConverged;
  } catch (const pint::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
}
