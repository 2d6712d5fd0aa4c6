#pragma once

#include <string>

#include "fwm/triple.hpp"

namespace fwm {

/// Declared constants of the coercivity, monotonicity, boundedness and
/// noise-Lipschitz hypotheses. Exponents q1, q2 live on the SpaceSpec.
struct ModelConstants {
  double lambda1 = 0.5, lambda2 = 0.5, lambda3 = 1.0;  // coercivity
  double lambda0 = 0.0, lambda1p = 0.0, lambda2p = 0.0;  // monotonicity
  double c_a1 = 1.0, c_a2 = 1.0;                         // boundedness
  double beta1 = 1.0;                                    // noise Lipschitz / growth
  double embedding = 1.0;                                // ‖x‖_X >= embedding·‖x‖_H
};

/// Operator bundle (A1, A2, B) of a monotone stochastic evolution equation
///
///   dX = [A1(t,X) + A2(t,X)] dt + B(t,X) dW,   X(0) = x0,
///
/// on a discretized evolution triple. Drift values are DualVecs in H-Riesz
/// coordinates so the Galerkin system reads x' = A(t,x). The noise enters
/// through the d×m matrix B(t,x) acting on U_Q-orthonormal coordinates.
///
/// Implementations must be pure: a Model is shared read-only across threads.
class Model {
 public:
  Model(SpaceSpec space, int noise_dim, ModelConstants constants, StateVec x0);
  virtual ~Model() = default;

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  virtual std::string name() const = 0;

  const SpaceSpec& space() const { return space_; }
  int dim() const { return space_.dim(); }
  int noise_dim() const { return noise_dim_; }
  const ModelConstants& constants() const { return constants_; }
  const StateVec& x0() const { return x0_; }

  virtual DualVec apply_a1(double t, const StateVec& x) const = 0;
  virtual DualVec apply_a2(double t, const StateVec& x) const;

  /// A1 + A2; throws NumericRangeError when the result is not finite.
  DualVec apply_a(double t, const StateVec& x) const;

  /// ∂A/∂x. The default is a central finite difference of apply_a.
  virtual Mat jacobian_a(double t, const StateVec& x) const;

  /// B(t,x) as a d×m matrix.
  virtual Mat noise_matrix(double t, const StateVec& x) const = 0;

  /// ∂/∂x [B(t,x)u]. The default is a central finite difference.
  virtual Mat noise_derivative(double t, const StateVec& x, const Vec& u) const;

  /// Σ_j ‖B(t,x)e_j‖²_H.
  virtual double b_hs_norm_sq(double t, const StateVec& x) const;

 private:
  SpaceSpec space_;
  int noise_dim_;
  ModelConstants constants_;
  StateVec x0_;
};

/// B(t,x)u, checking the length of u.
StateVec apply_b_vec(const Model& model, double t, const StateVec& x, const Vec& u);

/// A1(t,x) + A2(t,x).
inline DualVec apply_a(const Model& model, double t, const StateVec& x) { return model.apply_a(t, x); }

/// ‖B(t,x) − B(t,y)‖²_{L2(U_Q,H)}.
double b_hs_distance_sq(const Model& model, double t, const StateVec& x, const StateVec& y);

}  // namespace fwm
