#include <CLI11.hpp>

#include <iostream>

#include "fwm/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Small-noise experiments for monotone stochastic evolution equations"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string manifest_path;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  std::vector<double> target;
  std::vector<double> delta_schedule;
  int max_iters = 0;

  auto* seed_opt = app.add_option("--seed", seed, "Override noise.master_seed");
  auto* out_opt = app.add_option("--out", out, "Override output.directory");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads")->envname("FWMINACT_THREADS")->check(CLI::PositiveNumber);

  const std::vector<std::pair<std::string, std::string>> tasks{
      {"simulate", "Simulate sample paths of the SPDE"},
      {"skeleton", "Solve the controlled skeleton equation"},
      {"minact", "Estimate the rate function by minimum action"},
      {"mc-ldp", "Monte Carlo small-noise curve"},
      {"check-hypotheses", "Randomized checks of the standing hypotheses"}};
  std::vector<CLI::App*> subs;
  CLI::Option* target_opt = nullptr;
  CLI::Option* schedule_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  for (const auto& [name, help] : tasks) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment configuration (YAML)")->required()->check(CLI::ExistingFile);
    if (name == "minact") {
      target_opt = sub->add_option("--target", target, "Endpoint target coordinates");
      schedule_opt = sub->add_option("--delta-schedule", delta_schedule, "Decreasing penalty sequence");
      iters_opt = sub->add_option("--max-iters", max_iters, "Iteration budget per penalty stage");
    }
    subs.push_back(sub);
  }
  CLI::App* replay = app.add_subcommand("replay", "Rerun an experiment from its manifest and compare outputs");
  replay->add_option("--manifest", manifest_path, "manifest.yaml of a previous run")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fwm::kExitConfig;
  }

  fwm::RunOverrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*out_opt) overrides.out = out;
  if (*threads_opt) overrides.threads = threads;
  if (target_opt && *target_opt) overrides.target = target;
  if (schedule_opt && *schedule_opt) overrides.delta_schedule = delta_schedule;
  if (iters_opt && *iters_opt) overrides.max_iters = max_iters;

  if (replay->parsed()) return fwm::replay_manifest(manifest_path, overrides, std::cout);
  for (CLI::App* sub : subs) {
    if (sub->parsed()) return fwm::run_config_file(config_path, sub->get_name(), overrides, std::cout);
  }
  return fwm::kExitConfig;
}
