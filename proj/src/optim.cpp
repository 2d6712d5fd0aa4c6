#include "fwm/optim.hpp"

#include <cmath>
#include <deque>

namespace fwm {

namespace {

struct CurvaturePair {
  Vec s, y;
  double rho;
};

Vec two_loop(const std::deque<CurvaturePair>& pairs, const Vec& grad) {
  Vec q = grad;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - beta) * pairs[i].s;
  }
  return -q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Vec x0, const LbfgsOptions& opts, const ProjectionFn& project,
                           const GradNormFn& grad_norm) {
  auto gnorm = [&](const Vec& g) { return grad_norm ? grad_norm(g) : g.lpNorm<Eigen::Infinity>(); };

  LbfgsResult res;
  res.x = project ? project(x0) : std::move(x0);
  Vec grad;
  res.value = fg(res.x, grad);
  res.grad_norm = gnorm(grad);
  res.history.push_back(res.value);

  std::deque<CurvaturePair> pairs;
  Vec trial_grad;
  while (res.iterations < opts.max_iters) {
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    Vec dir = two_loop(pairs, grad);
    if (dir.dot(grad) >= 0.0) {
      pairs.clear();
      dir = -grad;
    }
    if (pairs.empty()) dir *= 1.0 / std::max(1.0, dir.lpNorm<Eigen::Infinity>());

    bool accepted = false;
    double step = 1.0;
    Vec trial;
    double trial_value = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt, step *= 0.5) {
      trial = res.x + step * dir;
      if (project) trial = project(trial);
      const double decrease = grad.dot(trial - res.x);
      trial_value = fg(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value <= res.value + opts.armijo * decrease &&
          trial_value <= res.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!pairs.empty()) {
        // stale curvature: restart from steepest descent once
        pairs.clear();
        continue;
      }
      break;
    }

    CurvaturePair cp{trial - res.x, trial_grad - grad, 0.0};
    const double sy = cp.s.dot(cp.y);
    if (sy > 1e-12 * cp.s.norm() * cp.y.norm()) {
      cp.rho = 1.0 / sy;
      pairs.push_back(std::move(cp));
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }
    const bool stalled = trial_value == res.value && (trial - res.x).lpNorm<Eigen::Infinity>() == 0.0;
    res.x = std::move(trial);
    res.value = trial_value;
    grad = trial_grad;
    res.grad_norm = gnorm(grad);
    res.history.push_back(res.value);
    ++res.iterations;
    if (stalled) break;
  }
  if (res.grad_norm <= opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace fwm
