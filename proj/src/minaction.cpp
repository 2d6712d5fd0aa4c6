#include "fwm/minaction.hpp"

#include <cmath>
#include <limits>

#include "fwm/errors.hpp"
#include "fwm/optim.hpp"
#include "fwm/parallel.hpp"

namespace fwm {

void MinActionProblem::validate() const {
  if (!model) throw ArgumentError("MinActionProblem: model is missing");
  if (!(penalty_delta > 0.0)) throw ArgumentError("MinActionProblem: penalty_delta must be positive");
  if (!(T > 0.0)) throw ArgumentError("MinActionProblem: horizon must be positive");
  step.validate();
  for (double d : optimizer.delta_schedule) {
    if (!(d > 0.0)) throw ArgumentError("MinActionProblem: delta schedule entries must be positive");
  }
  if (optimizer.ball_radius && !(*optimizer.ball_radius > 0.0)) {
    throw ArgumentError("MinActionProblem: ball radius must be positive");
  }
  const int d = model->dim();
  if (const auto* e = std::get_if<EndpointTarget>(&target)) {
    if (e->y.size() != d) throw ArgumentError("MinActionProblem: target dimension does not match model");
  } else {
    const auto& p = std::get<PathTarget>(target);
    if (p.states.cols() != d || p.states.rows() != step.K + 1) {
      throw ArgumentError("MinActionProblem: path target must have K+1 rows of model dimension");
    }
  }
}

namespace {

void check_control(const MinActionProblem& problem, const ControlPath& h) {
  if (h.steps() != problem.step.K || h.modes() != problem.model->noise_dim()) {
    throw ArgumentError("control shape does not match the problem (K x m)");
  }
  if (std::abs(h.grid[h.steps()] - problem.T) > 1e-12 * problem.T) {
    throw ArgumentError("control grid horizon does not match the problem");
  }
}

// gap and ∂gap²/∂x_k for every k (row k of the returned matrix). With
// sup_power > 0 the sup over time points becomes the ℓ^r norm (r = sup_power),
// which is smooth and never smaller than the sup.
double gap_and_sensitivity(const MinActionProblem& problem, const PathSample& path, Mat* dgap_sq,
                           double sup_power = 0.0) {
  const SpaceSpec& space = problem.model->space();
  const int K = path.steps();
  const int d = problem.model->dim();
  if (dgap_sq) dgap_sq->setZero(K + 1, d);

  if (const auto* e = std::get_if<EndpointTarget>(&problem.target)) {
    const StateVec err = path.terminal() - e->y;
    if (dgap_sq) dgap_sq->row(K) = (2.0 * (space.gram() * err)).transpose();
    return h_norm(space, err);
  }

  const Mat err = path.states - std::get<PathTarget>(problem.target).states;
  Vec norms(K + 1);
  for (Eigen::Index k = 0; k <= K; ++k) norms[k] = h_norm(space, err.row(k).transpose());
  const double sup = norms.maxCoeff();
  double sup_term = sup;
  if (sup_power > 0.0 && sup > 0.0) {
    sup_term = sup * std::pow((norms / sup).array().pow(sup_power).sum(), 1.0 / sup_power);
  }
  const double s = s_norm(space, err, path.grid) - sup + sup_term;
  if (!dgap_sq || s == 0.0) return s;

  // d(s²) = 2s·ds; ds from the sup term and from both integral terms
  Mat ds = Mat::Zero(K + 1, d);
  if (sup > 0.0) {
    for (Eigen::Index k = 0; k <= K; ++k) {
      if (norms[k] == 0.0) continue;
      double w;
      if (sup_power > 0.0) {
        w = std::pow(norms[k] / sup_term, sup_power - 1.0);
      } else {
        Eigen::Index arg;
        norms.maxCoeff(&arg);
        w = k == arg ? 1.0 : 0.0;
      }
      if (w != 0.0) ds.row(k) = (w * space.gram() * err.row(k).transpose() / norms[k]).transpose();
    }
  }
  for (int i = 1; i <= 2; ++i) {
    const double q = space.recipe(i).q;
    const double integral = time_integral_x(space, err, path.grid, i);
    if (integral <= 0.0) continue;
    const double outer = std::pow(integral, 1.0 / q - 1.0);
    for (int k = 1; k <= K; ++k) {
      const StateVec ek = err.row(k).transpose();
      const double nk = x_norm(space, ek, i);
      if (nk == 0.0) continue;
      const double dt = path.grid[k] - path.grid[k - 1];
      ds.row(k) += (outer * dt * std::pow(nk, q - 1.0) * x_norm_gradient(space, ek, i)).transpose();
    }
  }
  *dgap_sq = 2.0 * s * ds;
  return s;
}

double penalized_action(const MinActionProblem& problem, const ControlPath& h, Mat* gradient, double sup_power) {
  check_control(problem, h);
  const Model& model = *problem.model;
  const PathSample path = solve_skeleton(model, h, problem.step);
  const int K = path.steps();
  const double delta = problem.penalty_delta;

  Mat dgap_sq;
  const double gap = gap_and_sensitivity(problem, path, gradient ? &dgap_sq : nullptr, sup_power);
  const double value = 0.5 * cm_norm_sq(h) + gap * gap / (2.0 * delta);
  if (!gradient) return value;

  const int d = model.dim();
  const double th = problem.step.theta;
  gradient->resize(K, h.modes());
  const Mat dphi = dgap_sq / (2.0 * delta);
  StateVec p = dphi.row(K).transpose();
  for (int k = K - 1; k >= 0; --k) {
    const double t = path.grid[k];
    const double dt = path.grid[k + 1] - path.grid[k];
    const StateVec xk = path.state(k);
    const StateVec xk1 = path.state(k + 1);
    const Mat m_next = Mat::Identity(d, d) - dt * th * model.jacobian_a(t + dt, xk1);
    const StateVec mu = m_next.transpose().partialPivLu().solve(p);
    const Vec hk = h.hdot.row(k).transpose();
    gradient->row(k) = (dt * hk + dt * model.noise_matrix(t, xk).transpose() * mu).transpose();
    Mat n_k = Mat::Identity(d, d) + dt * model.noise_derivative(t, xk, hk);
    if (th < 1.0) n_k += dt * (1.0 - th) * model.jacobian_a(t, xk);
    p = n_k.transpose() * mu + dphi.row(k).transpose();
  }
  return value;
}

}  // namespace

double action_objective_and_gradient(const MinActionProblem& problem, const ControlPath& h, Mat* gradient) {
  return penalized_action(problem, h, gradient, 0.0);
}

double action_objective(const MinActionProblem& problem, const ControlPath& h) {
  return action_objective_and_gradient(problem, h, nullptr);
}

Mat action_gradient(const MinActionProblem& problem, const ControlPath& h) {
  Mat g;
  action_objective_and_gradient(problem, h, &g);
  return g;
}

double target_gap(const MinActionProblem& problem, const ControlPath& h) {
  check_control(problem, h);
  const PathSample path = solve_skeleton(*problem.model, h, problem.step);
  return gap_and_sensitivity(problem, path, nullptr);
}

RateEstimate minimize_action(const MinActionProblem& problem) {
  problem.validate();
  const int K = problem.step.K;
  const int m = problem.model->noise_dim();
  ControlPath h = problem.optimizer.initial ? *problem.optimizer.initial : ControlPath::zeros(problem.T, K, m);
  check_control(problem, h);
  const Vec grid = h.grid;
  const Vec dt = grid.tail(K) - grid.head(K);

  std::vector<double> deltas = problem.optimizer.delta_schedule;
  if (deltas.empty()) deltas.push_back(problem.penalty_delta);

  auto to_control = [&](const Vec& flat) {
    return ControlPath{grid, Eigen::Map<const Mat>(flat.data(), K, m)};
  };
  ProjectionFn project;
  if (problem.optimizer.ball_radius) {
    const double N = *problem.optimizer.ball_radius;
    project = [&, N](const Vec& flat) {
      const ControlPath c = project_ball(to_control(flat), N);
      return Vec(Eigen::Map<const Vec>(c.hdot.data(), c.hdot.size()));
    };
  }
  const GradNormFn l2_dual = [&](const Vec& g) {
    const Eigen::Map<const Mat> gm(g.data(), K, m);
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += gm.row(k).squaredNorm() / dt[k];
    return std::sqrt(s);
  };

  RateEstimate est;
  Vec flat = Eigen::Map<const Vec>(h.hdot.data(), h.hdot.size());
  for (double delta : deltas) {
    MinActionProblem stage = problem;
    stage.penalty_delta = delta;
    const ObjectiveFn fg = [&](const Vec& x, Vec& grad) {
      Mat g;
      const double v = penalized_action(stage, to_control(x), &g, problem.optimizer.path_sup_power);
      grad = Eigen::Map<const Vec>(g.data(), g.size());
      return v;
    };
    LbfgsOptions lopts;
    lopts.max_iters = problem.optimizer.max_iters;
    lopts.grad_tol = problem.optimizer.grad_tol;
    lopts.memory = problem.optimizer.memory;
    const LbfgsResult res = lbfgs_minimize(fg, flat, lopts, project, l2_dual);
    flat = res.x;

    const ControlPath hc = to_control(flat);
    ContinuationStage st;
    st.delta = delta;
    st.value = 0.5 * cm_norm_sq(hc);
    st.terminal_gap = target_gap(stage, hc);
    st.iterations = res.iterations;
    st.converged = res.converged;
    est.stages.push_back(st);
    est.iterations += res.iterations;
    est.objective = res.value;
    est.grad_norm = res.grad_norm;
    est.converged = res.converged;
    est.objective_history = res.history;
  }
  est.h_opt = to_control(flat);
  est.value = est.stages.back().value;
  est.terminal_gap = est.stages.back().terminal_gap;
  return est;
}

LevelSetResult rate_of_level_set(const MinActionProblem& problem, const std::vector<StateVec>& targets, int threads,
                                 int chunk) {
  if (chunk < 1) throw ArgumentError("rate_of_level_set: chunk must be >= 1");
  LevelSetResult out;
  out.estimates.resize(targets.size());
  std::vector<std::string> errors(targets.size());
  const std::size_t n_chunks = (targets.size() + chunk - 1) / chunk;

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    MinActionProblem p = problem;
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(targets.size(), begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      p.target = EndpointTarget{targets[i]};
      try {
        out.estimates[i] = minimize_action(p);
        p.optimizer.initial = out.estimates[i]->h_opt;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  });

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!out.estimates[i]) {
      out.failures.push_back("target " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    if (out.estimates[i]->value < best) {
      best = out.estimates[i]->value;
      out.argmin = i;
    }
  }
  if (out.argmin) {
    const ControlPath& h_best = out.estimates[*out.argmin]->h_opt;
    const double scale = std::sqrt(std::max(cm_norm_sq(h_best), 1e-300));
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (i == *out.argmin || !out.estimates[i]) continue;
      const RateEstimate& e = *out.estimates[i];
      const bool close_value = std::abs(e.value - best) <= 0.01 * std::max(best, 1e-300);
      ControlPath diff = e.h_opt;
      diff.hdot -= h_best.hdot;
      if (close_value && std::sqrt(cm_norm_sq(diff)) > 0.01 * scale) out.near_tie = true;
    }
  }
  return out;
}

}  // namespace fwm
