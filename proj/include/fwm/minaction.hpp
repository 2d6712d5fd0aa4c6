#pragma once

// Rate function by minimum action:
//
//   I(f) = ½ inf { ‖h‖²_{L_Q} : X^h = f },
//
// approximated on a time grid by minimizing the penalized action
//
//   J(h) = ½ Σ_k ‖ḣ_k‖² Δt + gap(X^h, target)² / (2δ)
//
// over piecewise-constant controls, where X^h solves the discrete skeleton
// equation. Gradients come from the exact adjoint of the implicit scheme.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fwm/model.hpp"
#include "fwm/noise.hpp"
#include "fwm/solvers.hpp"

namespace fwm {

/// Terminal target: X^h(T) = y, gap measured in H.
struct EndpointTarget {
  StateVec y;
};

/// Whole-path target f, gap measured in the discrete path-space norm.
struct PathTarget {
  Mat states;  // K+1 rows
};

using Target = std::variant<EndpointTarget, PathTarget>;

struct OptimizerOptions {
  int max_iters = 2000;
  /// Stationarity test on the L²(0,T)-dual norm of the gradient.
  double grad_tol = 1e-7;
  int memory = 10;
  /// Decreasing penalty sequence solved with warm starts; empty → {penalty_delta}.
  std::vector<double> delta_schedule;
  /// Optional radius N of the control ball {‖h‖² <= N}.
  std::optional<double> ball_radius;
  std::optional<ControlPath> initial;
  /// Path targets only: the optimizer replaces the sup over time points by
  /// an ℓ^r norm with this r (0 keeps the exact sup). Reported gaps are exact.
  double path_sup_power = 32.0;
};

struct MinActionProblem {
  std::shared_ptr<const Model> model;
  Target target;
  double penalty_delta = 1e-4;
  double T = 1.0;
  StepConfig step;
  OptimizerOptions optimizer;

  void validate() const;
};

struct ContinuationStage {
  double delta = 0.0;
  double value = 0.0;
  double terminal_gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RateEstimate {
  double value = 0.0;         // ½‖h_opt‖²
  double objective = 0.0;     // penalized objective at h_opt for the final δ
  ControlPath h_opt;
  double terminal_gap = 0.0;  // H- or path-norm distance of X^{h_opt} to the target
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<ContinuationStage> stages;
  std::vector<double> objective_history;  // accepted steps of the final stage
};

/// Penalized objective at the problem's penalty_delta.
double action_objective(const MinActionProblem& problem, const ControlPath& h);

/// Gradient of action_objective with respect to every ḣ_k (same shape as hdot).
Mat action_gradient(const MinActionProblem& problem, const ControlPath& h);

/// Objective and gradient in one forward/backward sweep.
double action_objective_and_gradient(const MinActionProblem& problem, const ControlPath& h, Mat* gradient);

/// Distance of X^h to the target (H-norm at T, or path-space norm).
double target_gap(const MinActionProblem& problem, const ControlPath& h);

RateEstimate minimize_action(const MinActionProblem& problem);

struct LevelSetResult {
  std::vector<std::optional<RateEstimate>> estimates;  // empty entry → failure
  std::vector<std::string> failures;                   // one message per failed target
  std::optional<std::size_t> argmin;
  /// Distinct minimizers whose values lie within 1% of the minimum.
  bool near_tie = false;
};

/// Runs minimize_action for every target. Targets are processed in fixed
/// chunks of `chunk` consecutive entries, each warm-started from its
/// predecessor in the chunk; chunks run in parallel. Results do not depend on
/// the thread count.
LevelSetResult rate_of_level_set(const MinActionProblem& problem, const std::vector<StateVec>& targets,
                                 int threads = 1, int chunk = 4);

}  // namespace fwm
