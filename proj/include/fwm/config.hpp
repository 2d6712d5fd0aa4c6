#pragma once

// Experiment configuration: a YAML tree with blocks model, space, time, noise,
// task and output. Parsing is total: every key is known or rejected, and each
// error names the line and the field path.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fwm {

struct OuParams {
  double a = 1.0;
  double s = 1.0;
  double x0 = 0.0;
  bool operator==(const OuParams&) const = default;
};

struct PolynomialParams {
  int dim = 1;
  double linear_rate = 1.0;
  double cubic_rate = 0.0;
  double additive_noise = 1.0;
  double tanh_noise = 0.0;
  std::vector<double> x0;
  bool operator==(const PolynomialParams&) const = default;
};

struct ReactionDiffusionConfig {
  int nodes = 8;
  double q1 = 3.0;
  double q2 = 4.0;
  double multiplicative_noise = 0.5;
  double additive_noise = 0.5;
  double x0_amplitude = 1.0;
  double jacobian_smoothing = 1e-8;
  bool operator==(const ReactionDiffusionConfig&) const = default;
};

struct NoiseTermConfig {
  double amplitude = 1.0;
  double slope = 0.0;
  int direction_mode = 1;
  int functional_mode = 1;
  double scale = 1.0;
  bool operator==(const NoiseTermConfig&) const = default;
};

struct PorousMediumConfig {
  int nodes = 8;
  double p = 3.0;
  double gamma = -1.0;  // < 0 selects p − 2
  std::vector<NoiseTermConfig> noise{{1.0, 0.5, 1, 1, 1.0}, {0.5, 0.0, 2, 2, 1.0}};
  double x0_amplitude = 1.0;
  double jacobian_smoothing = 1e-8;
  std::vector<double> x0;
  bool operator==(const PorousMediumConfig&) const = default;
};

/// A model from the built-in registry of hypothesis counterexamples.
struct CustomParams {
  std::string variant;
  bool operator==(const CustomParams&) const = default;
};

using ModelParams = std::variant<OuParams, PolynomialParams, ReactionDiffusionConfig, PorousMediumConfig, CustomParams>;

struct ModelBlock {
  std::string name = "ou";  // ou | polynomial | reaction_diffusion | porous_medium | custom
  ModelParams params;
  /// Overrides of declared constants (lambda1, lambda2, lambda3, lambda0,
  /// lambda1p, lambda2p, c_a1, c_a2, beta1, embedding).
  std::map<std::string, double> constants;
  bool operator==(const ModelBlock&) const = default;
};

/// Optional consistency declarations checked against the built model.
struct SpaceBlock {
  std::optional<int> dim;
  std::optional<double> mesh;
  std::optional<std::vector<double>> exponents;  // {q1, q2}
  bool operator==(const SpaceBlock&) const = default;
};

struct TimeBlock {
  double T = 1.0;
  int K = 256;
  double theta = 1.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  int max_retry_depth = 4;
  bool truncate_noise = false;
  bool operator==(const TimeBlock&) const = default;
};

struct NoiseBlock {
  std::optional<int> m;
  std::uint64_t master_seed = 1;
  bool operator==(const NoiseBlock&) const = default;
};

struct SimulateTask {
  double eps = 0.1;
  int replicas = 1;
  bool operator==(const SimulateTask&) const = default;
};

struct SkeletonTask {
  std::optional<std::string> control_csv;
  bool operator==(const SkeletonTask&) const = default;
};

struct MinactTask {
  std::vector<double> target;                 // endpoint y
  std::optional<std::string> target_path_csv;  // whole-path target instead
  double penalty_delta = 1e-4;
  std::vector<double> delta_schedule;
  int max_iters = 2000;
  double grad_tol = 1e-7;
  int memory = 10;
  std::optional<double> ball_radius;
  std::optional<std::string> initial_control_csv;
  bool operator==(const MinactTask&) const = default;
};

/// Event on X(T): halfspace ⟨x, direction⟩ >= threshold (Euclidean
/// coordinates), ball ‖x − center‖_H <= radius, or always.
struct EventConfig {
  std::string kind = "terminal_halfspace";
  std::vector<double> direction;
  double threshold = 0.0;
  std::vector<double> center;
  double radius = 0.0;
  bool operator==(const EventConfig&) const = default;
};

/// g(X) = min(cap, ‖X(T) − target‖²_H).
struct FunctionalConfig {
  std::string kind = "terminal_quadratic";
  std::vector<double> target;
  double cap = 1.0;
  bool operator==(const FunctionalConfig&) const = default;
};

struct McLdpTask {
  std::vector<double> eps_list;
  int n_samples = 1000;
  std::optional<EventConfig> event;
  std::optional<FunctionalConfig> functional;
  std::optional<std::string> shift_csv;
  double is_threshold = 1.0;
  std::optional<double> reference_rate;  // I, compared against ε log p̂ at the smallest ε
  bool operator==(const McLdpTask&) const = default;
};

struct CheckTask {
  int n_samples = 1000;
  double radius = 10.0;
  int hemi_coarse_level = 4;
  int hemi_fine_level = 12;
  double hemi_tolerance = 1e-6;
  bool operator==(const CheckTask&) const = default;
};

using TaskParams = std::variant<SimulateTask, SkeletonTask, MinactTask, McLdpTask, CheckTask>;

struct OutputBlock {
  std::string directory = "out";
  int precision = 17;
  bool operator==(const OutputBlock&) const = default;
};

struct ExperimentConfig {
  ModelBlock model;
  SpaceBlock space;
  TimeBlock time;
  NoiseBlock noise;
  TaskParams task;
  OutputBlock output;
  int threads = 1;
  bool operator==(const ExperimentConfig&) const = default;
};

/// simulate | skeleton | minact | mc-ldp | check-hypotheses
std::string task_name(const TaskParams& task);

/// Throws ConfigError("line L, field a.b", ...) on any malformed input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved YAML (all defaults written out). Doubles use the shortest
/// representation that reads back exactly.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace fwm
