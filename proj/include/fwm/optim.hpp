#pragma once

#include <functional>
#include <vector>

#include "fwm/triple.hpp"

namespace fwm {

/// Objective callback: returns f(x) and writes ∇f(x) into grad.
using ObjectiveFn = std::function<double(const Vec& x, Vec& grad)>;
/// Optional projection onto a feasible set (applied to every trial point).
using ProjectionFn = std::function<Vec(const Vec& x)>;
/// Norm used for the stationarity test.
using GradNormFn = std::function<double(const Vec& grad)>;

struct LbfgsOptions {
  int max_iters = 500;
  int memory = 10;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  int max_backtracks = 50;
};

struct LbfgsResult {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective after every accepted step (starts with f(x0)).
  std::vector<double> history;
};

/// Limited-memory BFGS with Armijo backtracking. Only steps that decrease
/// the objective are accepted, so `history` is non-increasing.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Vec x0, const LbfgsOptions& opts,
                           const ProjectionFn& project = {}, const GradNormFn& grad_norm = {});

}  // namespace fwm
