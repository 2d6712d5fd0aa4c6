#include "fwm/triple.hpp"

#include <cmath>
#include <string>

#include "fwm/errors.hpp"
#include "fwm/optim.hpp"

namespace fwm {

namespace {

void require_dim(const SpaceSpec& space, const Vec& v, const char* what) {
  if (v.size() != space.dim()) {
    throw ArgumentError(std::string(what) + ": length " + std::to_string(v.size()) +
                        " does not match space dimension " + std::to_string(space.dim()));
  }
}

Vec forward_differences(const Vec& x, double mesh) {
  const auto n = x.size();
  Vec g(n + 1);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    g[i] = (x[i] - prev) / mesh;
    prev = x[i];
  }
  g[n] = -prev / mesh;
  return g;
}

// Σ_c w_c |v_c|^q
double power_sum(const Vec& v, const Vec& w, double q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), q);
  return s;
}

}  // namespace

NormRecipe NormRecipe::lq(double q, Vec weights) {
  NormRecipe r;
  r.kind = NormKind::Lq;
  r.q = q;
  r.weights = std::move(weights);
  return r;
}

NormRecipe NormRecipe::grad_lq(double q, double mesh) {
  NormRecipe r;
  r.kind = NormKind::GradLq;
  r.q = q;
  r.mesh = mesh;
  return r;
}

SpaceSpec::SpaceSpec(Mat gram_h, NormRecipe x1, NormRecipe x2, Vec quadrature_weights)
    : gram_(std::move(gram_h)), x1_(std::move(x1)), x2_(std::move(x2)), weights_(std::move(quadrature_weights)) {
  const auto d = gram_.rows();
  if (d < 1 || gram_.cols() != d) throw ArgumentError("gram_H must be a non-empty square matrix");
  if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gram_.cwiseAbs().maxCoeff())) {
    throw ArgumentError("gram_H must be symmetric");
  }
  gram_llt_.compute(gram_);
  if (gram_llt_.info() != Eigen::Success) throw ArgumentError("gram_H must be positive definite");
  for (const NormRecipe* r : {&x1_, &x2_}) {
    if (!(r->q >= 2.0)) throw ArgumentError("norm exponents must satisfy q >= 2");
    if (r->kind == NormKind::Lq && r->weights.size() != d) {
      throw ArgumentError("Lq norm recipe needs one weight per node");
    }
    if (r->kind == NormKind::GradLq && !(r->mesh > 0.0)) throw ArgumentError("mesh must be positive");
  }
  if (weights_.size() != d) throw ArgumentError("quadrature weights need one entry per node");
}

const NormRecipe& SpaceSpec::recipe(int which) const {
  if (which == 1) return x1_;
  if (which == 2) return x2_;
  throw ArgumentError("norm selector must be 1 or 2");
}

SpaceSpec euclidean_space(int dim, double q1, double q2) {
  if (dim < 1) throw ArgumentError("dimension must be positive");
  const Vec ones = Vec::Ones(dim);
  return SpaceSpec(Mat::Identity(dim, dim), NormRecipe::lq(q1, ones), NormRecipe::lq(q2, ones), ones);
}

Mat dirichlet_laplacian(int nodes) {
  if (nodes < 1) throw ArgumentError("mesh needs at least one interior node");
  const double h = 1.0 / (nodes + 1);
  Mat lap = Mat::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i) {
    lap(i, i) = 2.0 / (h * h);
    if (i > 0) lap(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < nodes) lap(i, i + 1) = -1.0 / (h * h);
  }
  return lap;
}

Mat dirichlet_gradient(int nodes, double mesh) {
  Mat grad = Mat::Zero(nodes + 1, nodes);
  for (int c = 0; c <= nodes; ++c) {
    if (c < nodes) grad(c, c) = 1.0 / mesh;
    if (c > 0) grad(c, c - 1) = -1.0 / mesh;
  }
  return grad;
}

SpaceSpec sobolev_space_1d(int nodes, double q1, double q2) {
  if (nodes < 1) throw ArgumentError("mesh needs at least one interior node");
  const double h = 1.0 / (nodes + 1);
  const Vec w = Vec::Constant(nodes, h);
  return SpaceSpec(h * Mat::Identity(nodes, nodes), NormRecipe::grad_lq(q1, h), NormRecipe::lq(q2, w), w);
}

SpaceSpec negative_sobolev_space_1d(int nodes, double q) {
  const double h = 1.0 / (nodes + 1);
  const Vec w = Vec::Constant(nodes, h);
  Mat gram = h * dirichlet_laplacian(nodes).inverse();
  gram = 0.5 * (gram + gram.transpose()).eval();
  return SpaceSpec(std::move(gram), NormRecipe::lq(q, w), NormRecipe::lq(q, w), w);
}

double h_inner(const SpaceSpec& space, const StateVec& x, const StateVec& y) {
  require_dim(space, x, "h_inner");
  require_dim(space, y, "h_inner");
  return x.dot(space.gram() * y);
}

double h_norm(const SpaceSpec& space, const StateVec& x) { return std::sqrt(std::max(0.0, h_inner(space, x, x))); }

double x_norm(const SpaceSpec& space, const StateVec& x, int which) {
  require_dim(space, x, "x_norm");
  const NormRecipe& r = space.recipe(which);
  if (r.kind == NormKind::Lq) return std::pow(power_sum(x, r.weights, r.q), 1.0 / r.q);
  const Vec g = forward_differences(x, r.mesh);
  return std::pow(power_sum(g, Vec::Constant(g.size(), r.mesh), r.q), 1.0 / r.q);
}

double x_norm_sum(const SpaceSpec& space, const StateVec& x) { return x_norm(space, x, 1) + x_norm(space, x, 2); }

Vec x_norm_gradient(const SpaceSpec& space, const StateVec& x, int which) {
  require_dim(space, x, "x_norm_gradient");
  const NormRecipe& r = space.recipe(which);
  const double norm = x_norm(space, x, which);
  Vec grad = Vec::Zero(x.size());
  if (norm == 0.0) return grad;
  // ∂ (S^{1/q}) = S^{1/q-1}·w·|v|^{q-2}v ⋅ ∂v
  const double scale = std::pow(norm, 1.0 - r.q);
  if (r.kind == NormKind::Lq) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      grad[i] = scale * r.weights[i] * std::pow(std::abs(x[i]), r.q - 2.0) * x[i];
    }
    return grad;
  }
  const Vec g = forward_differences(x, r.mesh);
  Vec flux(g.size());
  for (Eigen::Index c = 0; c < g.size(); ++c) flux[c] = r.mesh * std::pow(std::abs(g[c]), r.q - 2.0) * g[c];
  // transpose of forward differences
  for (Eigen::Index i = 0; i < x.size(); ++i) grad[i] = scale * (flux[i] - flux[i + 1]) / r.mesh;
  return grad;
}

double pairing(const SpaceSpec& space, const StateVec& x, const DualVec& f) {
  require_dim(space, x, "pairing");
  require_dim(space, f, "pairing");
  return x.dot(space.gram() * f);
}

double dual_norm_estimate(const SpaceSpec& space, const DualVec& f, const DualNormOptions& opts) {
  require_dim(space, f, "dual_norm_estimate");
  const Vec g = space.gram() * f;
  if (g.isZero(0.0)) return 0.0;

  auto norm = [&](const Vec& v) {
    if (opts.which == 0) return x_norm_sum(space, v);
    return x_norm(space, v, opts.which);
  };
  auto norm_grad = [&](const Vec& v) -> Vec {
    if (opts.which == 0) return x_norm_gradient(space, v, 1) + x_norm_gradient(space, v, 2);
    return x_norm_gradient(space, v, opts.which);
  };

  double best = 0.0;
  auto consider = [&](const Vec& v) {
    const double n = norm(v);
    if (n > 0.0) best = std::max(best, v.dot(g) / n);
  };

  // minimize ½‖v‖² − vᵀg; its minimum is −½‖g‖_*²
  ObjectiveFn fg = [&](const Vec& v, Vec& grad) {
    const double n = norm(v);
    grad = n * norm_grad(v) - g;
    consider(v);
    return 0.5 * n * n - v.dot(g);
  };

  const double ng = norm(g);
  Vec v0 = g * (g.squaredNorm() / (ng * ng));
  LbfgsOptions lopts;
  lopts.max_iters = opts.iterations;
  lopts.grad_tol = opts.grad_tol * std::max(1.0, g.cwiseAbs().maxCoeff());
  const LbfgsResult res = lbfgs_minimize(fg, std::move(v0), lopts);
  consider(res.x);
  return best;
}

}  // namespace fwm
