#include "fwm/solvers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fwm/errors.hpp"

namespace fwm {

void StepConfig::validate() const {
  if (K < 1) throw ArgumentError("StepConfig: K must be >= 1");
  if (!(newton_tol > 0.0)) throw ArgumentError("StepConfig: newton_tol must be positive");
  if (!(theta >= 0.5 && theta <= 1.0)) throw ArgumentError("StepConfig: theta must lie in [0.5, 1]");
  if (newton_max_iter < 1) throw ArgumentError("StepConfig: newton_max_iter must be >= 1");
  if (max_retry_depth < 0) throw ArgumentError("StepConfig: max_retry_depth must be >= 0");
}

StateVec step_implicit(const Model& model, double t, const StateVec& x, double dt, const StateVec& forcing,
                       const StepConfig& step) {
  if (!(dt > 0.0)) throw ArgumentError("step_implicit: dt must be positive");
  if (forcing.size() != x.size()) throw ArgumentError("step_implicit: forcing length mismatch");
  const SpaceSpec& space = model.space();
  const double th = step.theta;
  const double t1 = t + dt;

  StateVec base = x + forcing;
  if (th < 1.0) base += dt * (1.0 - th) * model.apply_a(t, x);

  auto residual = [&](const StateVec& y, DualVec& r) {
    r = y - base - dt * th * model.apply_a(t1, y);
    return h_norm(space, r);
  };

  std::vector<double> history;
  StateVec y = x + forcing;
  DualVec r;
  double res = residual(y, r);
  history.push_back(res);
  const int d = model.dim();

  for (int it = 0; it < step.newton_max_iter && res > step.newton_tol; ++it) {
    const Mat jac = Mat::Identity(d, d) - dt * th * model.jacobian_a(t1, y);
    const StateVec delta = jac.partialPivLu().solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      const StateVec trial = y + alpha * delta;
      DualVec rt;
      double rest;
      try {
        rest = residual(trial, rt);
      } catch (const NumericRangeError&) {
        continue;
      }
      if (std::isfinite(rest) && rest < (1.0 - 1e-4 * alpha) * res) {
        y = trial;
        r = std::move(rt);
        res = rest;
        improved = true;
        break;
      }
    }
    history.push_back(res);
    if (!improved) break;
  }

  if (res > step.newton_tol) {
    // fixed-point fallback y ← base + dt·θ·A(t1, y)
    for (int it = 0; it < step.newton_max_iter && res > step.newton_tol; ++it) {
      const StateVec trial = base + dt * th * model.apply_a(t1, y);
      DualVec rt;
      const double rest = residual(trial, rt);
      history.push_back(rest);
      if (!(rest < res)) break;
      y = trial;
      r = std::move(rt);
      res = rest;
    }
  }
  if (!(res <= step.newton_tol)) {
    throw SolverError("step_implicit: no convergence at t=" + std::to_string(t) + " (residual " +
                          std::to_string(res) + ")",
                      std::move(history));
  }
  return y;
}

namespace {

StateVec advance(const Model& model, double t, const StateVec& x, double dt, const StateVec& forcing,
                 const StepConfig& step, int depth) {
  try {
    return step_implicit(model, t, x, dt, forcing, step);
  } catch (const SolverError&) {
    if (depth >= step.max_retry_depth) throw;
  }
  const StateVec mid = advance(model, t, x, 0.5 * dt, 0.5 * forcing, step, depth + 1);
  return advance(model, t + 0.5 * dt, mid, 0.5 * dt, 0.5 * forcing, step, depth + 1);
}

void check_grid(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size() || (a - b).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff())) {
    throw ArgumentError(std::string(what) + ": time grids do not match");
  }
}

PathSample integrate(const Model& model, double eps, const StepConfig& step, const Vec& grid, const Mat* increments,
                     const std::optional<ControlPath>& control) {
  step.validate();
  if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("noise level eps must lie in [0, 1]");
  const int K = static_cast<int>(grid.size()) - 1;
  if (K != step.K) throw ArgumentError("StepConfig.K does not match the time grid");
  const int m = model.noise_dim();
  if (increments && (increments->rows() != K || increments->cols() != m)) {
    throw ArgumentError("Brownian increments have the wrong shape for this model");
  }
  if (control) {
    check_grid(control->grid, grid, "simulate_sde");
    if (control->modes() != m) throw ArgumentError("control has the wrong number of modes");
  }

  PathSample path;
  path.grid = grid;
  path.eps = eps;
  path.control = control;
  path.states.resize(K + 1, model.dim());
  path.states.row(0) = model.x0().transpose();
  StateVec x = model.x0();
  const double sqrt_eps = std::sqrt(eps);

  Vec drive(m);
  for (int k = 0; k < K; ++k) {
    const double t = grid[k];
    const double dt = grid[k + 1] - grid[k];
    drive.setZero();
    if (increments && eps > 0.0) {
      Vec dw = increments->row(k).transpose();
      if (step.truncate_noise) {
        const double cap = 6.0 * std::sqrt(dt);
        dw = dw.cwiseMax(-cap).cwiseMin(cap);
      }
      drive += sqrt_eps * dw;
    }
    if (control) drive += control->hdot.row(k).transpose() * dt;
    const StateVec forcing = drive.isZero(0.0) ? StateVec(StateVec::Zero(model.dim())) : apply_b_vec(model, t, x, drive);
    try {
      x = advance(model, t, x, dt, forcing, step, 0);
    } catch (const SolverError& err) {
      path.states.conservativeResize(k + 1, Eigen::NoChange);
      path.grid.conservativeResize(k + 1);
      throw SimulationError(err, std::move(path), k);
    }
    if (!x.allFinite()) throw NumericRangeError("simulate_sde: non-finite state", x.norm());
    path.states.row(k + 1) = x.transpose();
  }
  return path;
}

}  // namespace

PathSample simulate_sde(const Model& model, double eps, const StepConfig& step, const BrownianPath& noise,
                        const std::optional<ControlPath>& control) {
  PathSample path = integrate(model, eps, step, noise.grid, &noise.increments, control);
  path.seed = noise.seed;
  return path;
}

PathSample solve_skeleton(const Model& model, const ControlPath& h, const StepConfig& step) {
  return integrate(model, 0.0, step, h.grid, nullptr, h);
}

double energy_defect(const Model& model, const PathSample& path, const BrownianPath& noise,
                     const std::optional<ControlPath>& control) {
  const SpaceSpec& space = model.space();
  const int K = path.steps();
  if (noise.steps() != K) throw ArgumentError("energy_residual: noise does not match the path");
  const double eps = path.eps;
  const double sqrt_eps = std::sqrt(eps);

  const StateVec x0 = path.state(0);
  const StateVec xk = path.terminal();
  double defect = h_inner(space, xk, xk) - h_inner(space, x0, x0);
  for (int k = 0; k < K; ++k) {
    const double t = path.grid[k];
    const double dt = path.grid[k + 1] - path.grid[k];
    const StateVec x = path.state(k);
    defect -= 2.0 * pairing(space, x, model.apply_a(t, x)) * dt;
    const Mat b = model.noise_matrix(t, x);
    if (eps > 0.0) {
      defect -= 2.0 * sqrt_eps * h_inner(space, x, b * noise.increments.row(k).transpose());
      defect -= eps * model.b_hs_norm_sq(t, x) * dt;
    }
    if (control) defect -= 2.0 * h_inner(space, x, b * control->hdot.row(k).transpose()) * dt;
  }
  return defect;
}

double energy_residual(const Model& model, const PathSample& path, const BrownianPath& noise,
                       const std::optional<ControlPath>& control) {
  return std::abs(energy_defect(model, path, noise, control));
}

double time_integral_x(const SpaceSpec& space, const Mat& states, const Vec& grid, int which) {
  const double q = space.recipe(which).q;
  double s = 0.0;
  for (Eigen::Index k = 1; k < states.rows(); ++k) {
    s += (grid[k] - grid[k - 1]) * std::pow(x_norm(space, states.row(k).transpose(), which), q);
  }
  return s;
}

double s_norm(const SpaceSpec& space, const Mat& states, const Vec& grid) {
  double sup = 0.0;
  for (Eigen::Index k = 0; k < states.rows(); ++k) sup = std::max(sup, h_norm(space, states.row(k).transpose()));
  double total = sup;
  for (int i = 1; i <= 2; ++i) total += std::pow(time_integral_x(space, states, grid, i), 1.0 / space.recipe(i).q);
  return total;
}

}  // namespace fwm
