#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fwm/errors.hpp"
#include "fwm/model.hpp"
#include "fwm/noise.hpp"

namespace fwm {

struct StepConfig {
  int K = 256;
  double theta = 1.0;  // implicitness of the drift, in [0.5, 1]
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  int max_retry_depth = 4;  // local Δt halvings on a failed step
  bool truncate_noise = false;  // clamp |ΔW| to 6√Δt

  void validate() const;
};

/// Trajectory on the time grid. states has K+1 rows, one state per row.
struct PathSample {
  Vec grid;
  Mat states;
  double eps = 0.0;
  std::optional<std::uint64_t> seed;
  std::optional<ControlPath> control;

  StateVec state(int k) const { return states.row(k).transpose(); }
  StateVec terminal() const { return states.row(states.rows() - 1).transpose(); }
  int steps() const { return static_cast<int>(states.rows()) - 1; }
};

/// A step failed inside a sweep; carries the states computed so far.
class SimulationError : public SolverError {
 public:
  SimulationError(const SolverError& cause, PathSample partial, int failed_step)
      : SolverError(std::string(cause.what()) + " (step " + std::to_string(failed_step) + ")", cause.residual_history()),
        partial_(std::move(partial)),
        failed_step_(failed_step) {}
  const PathSample& partial_path() const { return partial_; }
  int failed_step() const { return failed_step_; }

 private:
  PathSample partial_;
  int failed_step_;
};

/// Solves y = x + dt·θ·A(t+dt, y) + dt·(1−θ)·A(t, x) + forcing by damped
/// Newton (halving line search on the H-residual), falling back to
/// fixed-point iteration. Throws SolverError with the residual history.
StateVec step_implicit(const Model& model, double t, const StateVec& x, double dt, const StateVec& forcing,
                       const StepConfig& step);

/// Drift-implicit, noise-explicit sweep of dX = A dt + B(√ε dW + ḣ dt).
/// On a failed step the interval is split in halves (bounded depth) with the
/// explicit increment shared equally between them.
PathSample simulate_sde(const Model& model, double eps, const StepConfig& step, const BrownianPath& noise,
                        const std::optional<ControlPath>& control = std::nullopt);

/// Noiseless controlled equation dX = A dt + B ḣ dt.
PathSample solve_skeleton(const Model& model, const ControlPath& h, const StepConfig& step);

/// Absolute defect of the discrete energy identity with left-endpoint sums:
/// ‖X_K‖² − ‖x0‖² − 2Σ[X_k,A(X_k)]Δt − 2√εΣ⟨X_k,B_kΔW_k⟩ − 2Σ⟨X_k,B_kḣ_k⟩Δt − εΣ‖B_k‖²_HS Δt.
double energy_residual(const Model& model, const PathSample& path, const BrownianPath& noise,
                       const std::optional<ControlPath>& control = std::nullopt);

/// Same identity without the absolute value.
double energy_defect(const Model& model, const PathSample& path, const BrownianPath& noise,
                     const std::optional<ControlPath>& control = std::nullopt);

/// Discrete path-space norm sup_k ‖x_k‖_H + Σ_i (Σ_{k>=1} Δt ‖x_k‖_{X_i}^{q_i})^{1/q_i}.
double s_norm(const SpaceSpec& space, const Mat& states, const Vec& grid);

/// Σ_{k>=1} Δt ‖x_k‖_{X_i}^{q_i}.
double time_integral_x(const SpaceSpec& space, const Mat& states, const Vec& grid, int which);

}  // namespace fwm
