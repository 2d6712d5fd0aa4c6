#pragma once

// Shipped operator bundles: monotone SDE on R^d, 1-d reaction–diffusion with a
// p-Laplacian flux, and 1-d porous medium in the W^{-1,2} pivot space.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fwm/model.hpp"

namespace fwm {

using VecField = std::function<Vec(double t, const Vec& x)>;
using MatField = std::function<Mat(double t, const Vec& x)>;

/// dX = b(t,X) dt + σ(t,X) dW on R^d, with b = b1 + b2 split so that b1 is
/// measured in l² (q1 = 2) and b2 in l^{q2}.
struct MonotoneSdeParams {
  int dim = 1;
  int noise_dim = 1;
  VecField drift_x1;
  MatField drift_x1_jacobian;  // optional
  VecField drift_x2;           // optional
  MatField drift_x2_jacobian;  // optional
  MatField sigma;              // d×m
  std::function<Mat(double t, const Vec& x, const Vec& u)> sigma_derivative;  // optional ∂_x[σ(x)u]
  double q2 = 2.0;
  double c_b = 0.0;      // declared one-sided Lipschitz constant of b
  double c_sigma = 0.0;  // declared Lipschitz constant of σ
  ModelConstants constants;
  StateVec x0;
  std::string name = "monotone_sde";
};

class MonotoneSdeModel final : public Model {
 public:
  explicit MonotoneSdeModel(MonotoneSdeParams params);

  std::string name() const override { return params_.name; }
  DualVec apply_a1(double t, const StateVec& x) const override;
  DualVec apply_a2(double t, const StateVec& x) const override;
  Mat jacobian_a(double t, const StateVec& x) const override;
  Mat noise_matrix(double t, const StateVec& x) const override;
  Mat noise_derivative(double t, const StateVec& x, const Vec& u) const override;

  double c_b() const { return params_.c_b; }
  double c_sigma() const { return params_.c_sigma; }

 private:
  MonotoneSdeParams params_;
};

/// b(x) = −a·x − c·x∘x∘x, σ(x) = s_add·I + s_tanh·diag(tanh x), m = d.
struct PolynomialSdeOptions {
  int dim = 1;
  double linear_rate = 1.0;  // a
  double cubic_rate = 0.0;   // c
  double additive_noise = 1.0;
  double tanh_noise = 0.0;
  StateVec x0;  // zero when empty
};

/// Builds the polynomial monotone SDE with constants derived for a, c >= 0.
std::shared_ptr<const MonotoneSdeModel> make_polynomial_sde(const PolynomialSdeOptions& opts);

/// Scalar Ornstein–Uhlenbeck dX = −aX dt + s dW.
std::shared_ptr<const MonotoneSdeModel> make_ou(double a, double s, double x0);

/// A function of the position ξ ∈ (0,1) and the field value r, with ∂/∂r.
struct ScalarLaw {
  std::function<double(double xi, double r)> value;
  std::function<double(double xi, double r)> slope;  // optional; finite difference if empty
};

/// r ↦ |r|^{q-2} r with a Huber-smoothed slope (q-1)(r² + reg²)^{(q-2)/2}.
ScalarLaw power_law(double q, double reg = 1e-8);

/// dX = [∂_ξ a(ξ, ∂_ξX) − b(ξ, X)] dt + Σ_j σ_j(ξ, X) dW_j on (0,1), X = 0 on the boundary.
struct ReactionDiffusionParams {
  int nodes = 8;
  double q1 = 3.0;
  double q2 = 4.0;
  ScalarLaw flux;                      // a; power_law(q1) when empty
  ScalarLaw reaction;                  // b; power_law(q2) when empty
  std::vector<ScalarLaw> noise_modes;  // σ_j
  ModelConstants constants;
  StateVec x0;
  std::string name = "reaction_diffusion";
};

struct ReactionDiffusionOptions {
  int nodes = 8;
  double q1 = 3.0;
  double q2 = 4.0;
  double multiplicative_noise = 0.5;  // σ_1 = c·sin(πξ)·tanh(r)
  double additive_noise = 0.5;        // σ_2 = c·sin(πξ)
  double x0_amplitude = 1.0;          // x0 = amplitude·sin(πξ)
  double jacobian_smoothing = 1e-8;
};

class ReactionDiffusionModel final : public Model {
 public:
  explicit ReactionDiffusionModel(ReactionDiffusionParams params);

  std::string name() const override { return params_.name; }
  DualVec apply_a1(double t, const StateVec& x) const override;
  DualVec apply_a2(double t, const StateVec& x) const override;
  Mat jacobian_a(double t, const StateVec& x) const override;
  Mat noise_matrix(double t, const StateVec& x) const override;
  Mat noise_derivative(double t, const StateVec& x, const Vec& u) const override;

  double mesh() const { return mesh_; }
  const ReactionDiffusionParams& params() const { return params_; }

 private:
  ReactionDiffusionParams params_;
  double mesh_;
  Mat grad_;
};

std::shared_ptr<const ReactionDiffusionModel> make_reaction_diffusion(const ReactionDiffusionOptions& opts);

/// One cylindrical noise term: u_k·g_k(⟨e_k, x⟩_H)·b_k with
/// g_k(s) = amplitude + slope·tanh(s), b_k = scale·sin(direction_mode·πξ),
/// e_k = sin(functional_mode·πξ).
struct CylindricalTerm {
  double amplitude = 1.0;
  double slope = 0.0;
  int direction_mode = 1;
  int functional_mode = 1;
  double scale = 1.0;
};

/// dX = Δφ(X) dt + B(X) dW with φ(r) = r|r|^γ on (0,1), H = W^{-1,2}.
struct PorousMediumOptions {
  int nodes = 8;
  double p = 3.0;
  double gamma = -1.0;  // < 0 selects p − 2
  std::vector<CylindricalTerm> noise{{1.0, 0.5, 1, 1, 1.0}, {0.5, 0.0, 2, 2, 1.0}};
  double x0_amplitude = 1.0;  // x0 = amplitude·sin(πξ)
  double jacobian_smoothing = 1e-8;
  StateVec x0;  // overrides x0_amplitude when non-empty
};

class PorousMediumModel final : public Model {
 public:
  PorousMediumModel(const PorousMediumOptions& opts, ModelConstants constants);

  std::string name() const override { return "porous_medium"; }
  DualVec apply_a1(double t, const StateVec& x) const override;
  Mat jacobian_a(double t, const StateVec& x) const override;
  Mat noise_matrix(double t, const StateVec& x) const override;
  Mat noise_derivative(double t, const StateVec& x, const Vec& u) const override;

  double phi(double r) const;
  double gamma() const { return gamma_; }
  double mesh() const { return mesh_; }
  /// Lipschitz constant of x ↦ B(x) in L2(U_Q,H) implied by the terms.
  double noise_lipschitz() const;
  /// sup_x ‖B(x)‖_{L2(U_Q,H)} implied by the terms.
  double noise_bound() const;

 private:
  PorousMediumOptions opts_;
  double gamma_;
  double mesh_;
  Mat laplacian_;
  Mat directions_;   // d×n, column k = b_k
  Mat functionals_;  // d×n, column k = e_k
};

std::shared_ptr<const PorousMediumModel> make_porous_medium(const PorousMediumOptions& opts);

/// φ(r) = r·|r|^γ.
double porous_phi(double r, double gamma);

/// The same operators as `base` with different declared constants.
std::shared_ptr<const Model> with_constants(std::shared_ptr<const Model> base, const ModelConstants& constants);

/// Models built to break one hypothesis each; the matching check flags them.
/// Some also break a second one (sign_drift and anti_coercive fail H3 too).
namespace counterexamples {
/// A(x) = sign(x) on R: not hemicontinuous.
std::shared_ptr<const Model> sign_drift();
/// A(x) = +x on R: violates coercivity with the declared λ's.
std::shared_ptr<const Model> anti_coercive();
/// b(x) = +x³ on R: violates monotonicity.
std::shared_ptr<const Model> anti_monotone_cubic();
/// Reaction–diffusion with flux a(r) = e^r: violates the growth bound.
std::shared_ptr<const Model> exponential_flux();
/// Reaction–diffusion with noise σ(r) = r²: violates the noise Lipschitz bound.
std::shared_ptr<const Model> square_noise();
}  // namespace counterexamples

}  // namespace fwm
