#pragma once

// Discrete evolution triple X = X1 ∩ X2 ⊂ H ⊂ X*.
//
// States live in Galerkin (nodal) coordinates. Functionals are stored in
// H-Riesz coordinates: a DualVec f acts on a state x through xᵀ·G·f with G the
// H-Gram matrix, so the pairing of an H-representable functional coincides
// with the H inner product. In finite dimension every functional is
// representable this way.

#include <Eigen/Dense>

namespace fwm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using StateVec = Eigen::VectorXd;
using DualVec = Eigen::VectorXd;

enum class NormKind {
  Lq,      ///< (Σ_i w_i |x_i|^q)^{1/q}
  GradLq,  ///< discrete W^{1,q}_0: forward differences with zero Dirichlet ends, cell weight = mesh
};

struct NormRecipe {
  NormKind kind = NormKind::Lq;
  double q = 2.0;
  Vec weights;        // Lq: one weight per node
  double mesh = 1.0;  // GradLq: uniform cell width

  static NormRecipe lq(double q, Vec weights);
  static NormRecipe grad_lq(double q, double mesh);
};

class SpaceSpec {
 public:
  /// Validates the Gram matrix (symmetric positive definite) and exponents (q >= 2).
  SpaceSpec(Mat gram_h, NormRecipe x1, NormRecipe x2, Vec quadrature_weights);

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Mat& gram() const { return gram_; }
  const NormRecipe& x1() const { return x1_; }
  const NormRecipe& x2() const { return x2_; }
  const NormRecipe& recipe(int which) const;
  double q1() const { return x1_.q; }
  double q2() const { return x2_.q; }
  const Vec& quadrature_weights() const { return weights_; }

  /// Solves G·f = g, i.e. converts a weak-form vector to Riesz coordinates.
  Vec riesz(const Vec& weak) const { return gram_llt_.solve(weak); }

 private:
  Mat gram_;
  Eigen::LLT<Mat> gram_llt_;
  NormRecipe x1_, x2_;
  Vec weights_;
};

/// Euclidean space R^d with H = X1 = X2-as-l^q (unit weights).
SpaceSpec euclidean_space(int dim, double q1 = 2.0, double q2 = 2.0);

/// Dirichlet 1-d mesh on (0,1) with `nodes` interior nodes: H = L2 (G = h·I),
/// X1 = W^{1,q1}_0, X2 = L^{q2}.
SpaceSpec sobolev_space_1d(int nodes, double q1, double q2);

/// Dirichlet 1-d mesh on (0,1): H = W^{-1,2} (G = h·L^{-1} with L the discrete
/// -Δ), X1 = X2 = L^q.
SpaceSpec negative_sobolev_space_1d(int nodes, double q);

/// Discrete Dirichlet Laplacian -Δ_h on `nodes` interior nodes of (0,1).
Mat dirichlet_laplacian(int nodes);

/// Forward-difference gradient, (nodes+1) x nodes, zero boundary values.
Mat dirichlet_gradient(int nodes, double mesh);

double h_inner(const SpaceSpec& space, const StateVec& x, const StateVec& y);
double h_norm(const SpaceSpec& space, const StateVec& x);

/// which ∈ {1, 2}.
double x_norm(const SpaceSpec& space, const StateVec& x, int which);

/// ‖x‖_X = ‖x‖_{X1} + ‖x‖_{X2}.
double x_norm_sum(const SpaceSpec& space, const StateVec& x);

/// Gradient of ‖·‖_{X_which} at x (zero at the kink x = 0).
Vec x_norm_gradient(const SpaceSpec& space, const StateVec& x, int which);

double pairing(const SpaceSpec& space, const StateVec& x, const DualVec& f);

struct DualNormOptions {
  /// 0 → norm of X* (against ‖·‖_{X1}+‖·‖_{X2}); 1 or 2 → X_i* alone.
  int which = 0;
  int iterations = 200;
  double grad_tol = 1e-12;
};

/// sup_{x≠0} pairing(x,f)/‖x‖ by maximizing the concave program
/// xᵀGf − ½‖x‖² with L-BFGS. Returns the best ratio seen, which is a lower
/// bound converging to the dual norm. Deterministic.
double dual_norm_estimate(const SpaceSpec& space, const DualVec& f, const DualNormOptions& opts = {});

}  // namespace fwm
