#pragma once

// Task dispatch for the command-line tool. Each run writes its CSV outputs and
// a manifest.yaml holding the resolved configuration, the seeds, every input
// file (content and git blob hash) and the hash of every output, so the run
// can be replayed from the manifest alone.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fwm/config.hpp"
#include "fwm/model.hpp"

namespace fwm {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitOptimizer = 4,
  kExitCheckFailed = 5,
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  // minact only
  std::optional<std::vector<double>> target;
  std::optional<std::vector<double>> delta_schedule;
  std::optional<int> max_iters;
};

/// Builds the model named in the block and applies declared-constant overrides.
std::shared_ptr<const Model> build_model(const ModelBlock& block);

/// Applies overrides and checks the space/noise declarations against the model.
ExperimentConfig resolve_config(ExperimentConfig config, const RunOverrides& overrides);

/// SHA-1 of "blob <size>\0" + content, as printed by git hash-object.
std::string git_blob_sha1(const std::string& content);

/// Runs a resolved configuration. Input files are read from disk unless
/// present in `inputs` (path → content). Messages go to `log`.
int run_experiment(const ExperimentConfig& config, std::ostream& log,
                   const std::map<std::string, std::string>& inputs = {});

/// Parses, resolves and runs a configuration file.
int run_config_file(const std::string& path, const std::string& expected_task, const RunOverrides& overrides,
                    std::ostream& log);

/// Reruns the experiment recorded in a manifest, writing into overrides.out
/// (or the recorded directory), then compares output hashes.
int replay_manifest(const std::string& manifest_path, const RunOverrides& overrides, std::ostream& log);

}  // namespace fwm
