#include "fwm/model.hpp"

#include <cmath>
#include <string>

#include "fwm/errors.hpp"

namespace fwm {

namespace {

double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

}  // namespace

Model::Model(SpaceSpec space, int noise_dim, ModelConstants constants, StateVec x0)
    : space_(std::move(space)), noise_dim_(noise_dim), constants_(constants), x0_(std::move(x0)) {
  if (noise_dim_ < 1) throw ArgumentError("noise dimension m must be at least 1");
  if (x0_.size() != space_.dim()) throw ArgumentError("x0 length does not match space dimension");
  if (!x0_.allFinite()) throw ArgumentError("x0 must be finite");
}

DualVec Model::apply_a2(double, const StateVec& x) const { return DualVec::Zero(x.size()); }

DualVec Model::apply_a(double t, const StateVec& x) const {
  if (x.size() != dim()) throw ArgumentError("apply_a: state length does not match model dimension");
  DualVec a = apply_a1(t, x) + apply_a2(t, x);
  if (!a.allFinite()) {
    throw NumericRangeError("apply_a: drift overflow at state with Euclidean norm " + std::to_string(x.norm()),
                            x.norm());
  }
  return a;
}

Mat Model::jacobian_a(double t, const StateVec& x) const {
  const int d = dim();
  Mat jac(d, d);
  StateVec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    const double h = fd_step(x[j]);
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (apply_a(t, xp) - apply_a(t, xm)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return jac;
}

Mat Model::noise_derivative(double t, const StateVec& x, const Vec& u) const {
  const int d = dim();
  Mat jac(d, d);
  StateVec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    const double h = fd_step(x[j]);
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (noise_matrix(t, xp) * u - noise_matrix(t, xm) * u) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return jac;
}

double Model::b_hs_norm_sq(double t, const StateVec& x) const {
  const Mat b = noise_matrix(t, x);
  return (b.transpose() * space_.gram() * b).trace();
}

StateVec apply_b_vec(const Model& model, double t, const StateVec& x, const Vec& u) {
  if (u.size() != model.noise_dim()) {
    throw ArgumentError("apply_b_vec: noise coordinate vector has length " + std::to_string(u.size()) +
                        ", expected " + std::to_string(model.noise_dim()));
  }
  if (x.size() != model.dim()) throw ArgumentError("apply_b_vec: state length does not match model dimension");
  return model.noise_matrix(t, x) * u;
}

double b_hs_distance_sq(const Model& model, double t, const StateVec& x, const StateVec& y) {
  const Mat diff = model.noise_matrix(t, x) - model.noise_matrix(t, y);
  return (diff.transpose() * model.space().gram() * diff).trace();
}

}  // namespace fwm
