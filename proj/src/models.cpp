#include "fwm/models.hpp"

#include <cmath>
#include <numbers>

#include "fwm/errors.hpp"

namespace fwm {

namespace {

constexpr double kPi = std::numbers::pi;

double law_slope(const ScalarLaw& law, double xi, double r) {
  if (law.slope) return law.slope(xi, r);
  const double h = 1e-6 * std::max(1.0, std::abs(r));
  return (law.value(xi, r + h) - law.value(xi, r - h)) / (2.0 * h);
}

StateVec sine_profile(int nodes, double amplitude, int mode = 1) {
  const double h = 1.0 / (nodes + 1);
  StateVec v(nodes);
  for (int i = 0; i < nodes; ++i) v[i] = amplitude * std::sin(mode * kPi * (i + 1) * h);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Monotone SDE

MonotoneSdeModel::MonotoneSdeModel(MonotoneSdeParams params)
    : Model(euclidean_space(params.dim, 2.0, params.q2), params.noise_dim, params.constants,
            params.x0.size() == 0 ? StateVec(StateVec::Zero(params.dim)) : params.x0),
      params_(std::move(params)) {
  if (!params_.drift_x1) throw ArgumentError("monotone SDE needs a drift");
  if (!params_.sigma) throw ArgumentError("monotone SDE needs a diffusion coefficient");
}

DualVec MonotoneSdeModel::apply_a1(double t, const StateVec& x) const { return params_.drift_x1(t, x); }

DualVec MonotoneSdeModel::apply_a2(double t, const StateVec& x) const {
  if (!params_.drift_x2) return DualVec::Zero(x.size());
  return params_.drift_x2(t, x);
}

Mat MonotoneSdeModel::jacobian_a(double t, const StateVec& x) const {
  if (!params_.drift_x1_jacobian || (params_.drift_x2 && !params_.drift_x2_jacobian)) {
    return Model::jacobian_a(t, x);
  }
  Mat jac = params_.drift_x1_jacobian(t, x);
  if (params_.drift_x2) jac += params_.drift_x2_jacobian(t, x);
  return jac;
}

Mat MonotoneSdeModel::noise_matrix(double t, const StateVec& x) const {
  Mat s = params_.sigma(t, x);
  if (s.rows() != dim() || s.cols() != noise_dim()) throw ArgumentError("sigma has the wrong shape");
  return s;
}

Mat MonotoneSdeModel::noise_derivative(double t, const StateVec& x, const Vec& u) const {
  if (params_.sigma_derivative) return params_.sigma_derivative(t, x, u);
  return Model::noise_derivative(t, x, u);
}

std::shared_ptr<const MonotoneSdeModel> make_polynomial_sde(const PolynomialSdeOptions& opts) {
  const int d = opts.dim;
  const double a = opts.linear_rate;
  const double c = opts.cubic_rate;
  const double s_add = opts.additive_noise;
  const double s_tanh = opts.tanh_noise;

  MonotoneSdeParams p;
  p.dim = d;
  p.noise_dim = d;
  p.drift_x1 = [a](double, const Vec& x) -> Vec { return -a * x; };
  p.drift_x1_jacobian = [a, d](double, const Vec&) -> Mat { return -a * Mat::Identity(d, d); };
  if (c != 0.0) {
    p.drift_x2 = [c](double, const Vec& x) -> Vec { return -c * x.array().cube().matrix(); };
    p.drift_x2_jacobian = [c](double, const Vec& x) -> Mat {
      return Mat((-3.0 * c * x.array().square()).matrix().asDiagonal());
    };
    p.q2 = 4.0;
  }
  p.sigma = [s_add, s_tanh, d](double, const Vec& x) -> Mat {
    Mat s = s_add * Mat::Identity(d, d);
    if (s_tanh != 0.0) s.diagonal() += s_tanh * x.array().tanh().matrix();
    return s;
  };
  p.sigma_derivative = [s_tanh](double, const Vec& x, const Vec& u) -> Mat {
    const Eigen::ArrayXd sech2 = 1.0 - x.array().tanh().square();
    return Mat((s_tanh * sech2 * u.array()).matrix().asDiagonal());
  };
  p.c_b = 0.0;
  p.c_sigma = std::abs(s_tanh);

  ModelConstants& k = p.constants;
  if (c != 0.0) {
    k.lambda1 = a > 0.0 ? 0.5 * a : 0.5;
    k.lambda2 = 0.5 * c;
    k.lambda1p = 0.5 * a;
    k.lambda2p = c / 8.0;  // (x³−y³)(x−y) >= (x−y)⁴/4
  } else {
    k.lambda1 = k.lambda2 = a > 0.0 ? 0.5 * a : 0.5;
    k.lambda1p = k.lambda2p = 0.25 * a;
  }
  k.lambda3 = 1.0;
  k.lambda0 = 0.0;
  k.c_a1 = std::max(a, 1.0);
  k.c_a2 = std::max(c, 1.0);
  k.beta1 = std::max({std::abs(s_tanh), std::sqrt(static_cast<double>(d)) * (std::abs(s_add) + std::abs(s_tanh)), 1e-3});
  k.embedding = 1.0;

  p.x0 = opts.x0.size() == 0 ? StateVec(StateVec::Zero(d)) : opts.x0;
  if (p.x0.size() != d) throw ArgumentError("x0 length does not match the SDE dimension");
  return std::make_shared<MonotoneSdeModel>(std::move(p));
}

std::shared_ptr<const MonotoneSdeModel> make_ou(double a, double s, double x0) {
  PolynomialSdeOptions opts;
  opts.dim = 1;
  opts.linear_rate = a;
  opts.additive_noise = s;
  opts.x0 = StateVec::Constant(1, x0);
  return make_polynomial_sde(opts);
}

// ---------------------------------------------------------------------------
// Reaction–diffusion

ScalarLaw power_law(double q, double reg) {
  ScalarLaw law;
  law.value = [q](double, double r) { return std::pow(std::abs(r), q - 2.0) * r; };
  law.slope = [q, reg](double, double r) { return (q - 1.0) * std::pow(r * r + reg * reg, 0.5 * (q - 2.0)); };
  return law;
}

ReactionDiffusionModel::ReactionDiffusionModel(ReactionDiffusionParams params)
    : Model(sobolev_space_1d(params.nodes, params.q1, params.q2), std::max<int>(1, static_cast<int>(params.noise_modes.size())),
            params.constants, params.x0.size() == 0 ? StateVec(StateVec::Zero(params.nodes)) : params.x0),
      params_(std::move(params)),
      mesh_(1.0 / (params_.nodes + 1)),
      grad_(dirichlet_gradient(params_.nodes, mesh_)) {
  if (!params_.flux.value) params_.flux = power_law(params_.q1);
  if (!params_.reaction.value) params_.reaction = power_law(params_.q2);
  if (params_.noise_modes.empty()) throw ArgumentError("reaction–diffusion needs at least one noise mode");
}

// A1(u) = −Dᵀ a(ξ_c, Du): weak form −Σ_c h a(ξ_c,(Du)_c)(Dv)_c divided by the Gram weight h.
DualVec ReactionDiffusionModel::apply_a1(double, const StateVec& x) const {
  const Vec g = grad_ * x;
  Vec flux(g.size());
  for (Eigen::Index c = 0; c < g.size(); ++c) flux[c] = params_.flux.value((c + 0.5) * mesh_, g[c]);
  return -grad_.transpose() * flux;
}

DualVec ReactionDiffusionModel::apply_a2(double, const StateVec& x) const {
  DualVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = -params_.reaction.value((i + 1) * mesh_, x[i]);
  return out;
}

Mat ReactionDiffusionModel::jacobian_a(double, const StateVec& x) const {
  const Vec g = grad_ * x;
  Vec slope(g.size());
  for (Eigen::Index c = 0; c < g.size(); ++c) slope[c] = law_slope(params_.flux, (c + 0.5) * mesh_, g[c]);
  Mat jac = -grad_.transpose() * slope.asDiagonal() * grad_;
  for (Eigen::Index i = 0; i < x.size(); ++i) jac(i, i) -= law_slope(params_.reaction, (i + 1) * mesh_, x[i]);
  return jac;
}

Mat ReactionDiffusionModel::noise_matrix(double, const StateVec& x) const {
  const auto m = static_cast<Eigen::Index>(params_.noise_modes.size());
  Mat b(x.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < x.size(); ++i) b(i, j) = params_.noise_modes[j].value((i + 1) * mesh_, x[i]);
  }
  return b;
}

Mat ReactionDiffusionModel::noise_derivative(double, const StateVec& x, const Vec& u) const {
  Vec diag = Vec::Zero(x.size());
  for (std::size_t j = 0; j < params_.noise_modes.size(); ++j) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      diag[i] += u[static_cast<Eigen::Index>(j)] * law_slope(params_.noise_modes[j], (i + 1) * mesh_, x[i]);
    }
  }
  return Mat(diag.asDiagonal());
}

std::shared_ptr<const ReactionDiffusionModel> make_reaction_diffusion(const ReactionDiffusionOptions& opts) {
  ReactionDiffusionParams p;
  p.nodes = opts.nodes;
  p.q1 = opts.q1;
  p.q2 = opts.q2;
  p.flux = power_law(opts.q1, opts.jacobian_smoothing);
  p.reaction = power_law(opts.q2, opts.jacobian_smoothing);

  const double cm = opts.multiplicative_noise;
  const double ca = opts.additive_noise;
  ScalarLaw tanh_mode;
  tanh_mode.value = [cm](double xi, double r) { return cm * std::sin(kPi * xi) * std::tanh(r); };
  tanh_mode.slope = [cm](double xi, double r) {
    const double th = std::tanh(r);
    return cm * std::sin(kPi * xi) * (1.0 - th * th);
  };
  ScalarLaw additive_mode;
  additive_mode.value = [ca](double xi, double) { return ca * std::sin(kPi * xi); };
  additive_mode.slope = [](double, double) { return 0.0; };
  p.noise_modes = {tanh_mode, additive_mode};

  ModelConstants& k = p.constants;
  k.lambda1 = k.lambda2 = 0.5;  // [x,A(x)] = −‖x‖_{X1}^{q1} − ‖x‖_{X2}^{q2}
  k.lambda3 = 1.0;
  k.lambda0 = 0.0;
  // (|a|^{q-2}a − |b|^{q-2}b)(a−b) >= 2^{2−q}|a−b|^q
  k.lambda1p = 0.5 * std::pow(2.0, 2.0 - opts.q1);
  k.lambda2p = 0.5 * std::pow(2.0, 2.0 - opts.q2);
  k.c_a1 = k.c_a2 = 1.0;  // Hölder: ‖A_i(x)‖_{X_i*} <= ‖x‖_{X_i}^{q_i−1}
  k.beta1 = std::max({std::abs(cm), std::hypot(cm, ca), 1e-3});
  k.embedding = 1.0;

  p.x0 = sine_profile(opts.nodes, opts.x0_amplitude);
  return std::make_shared<ReactionDiffusionModel>(std::move(p));
}

// ---------------------------------------------------------------------------
// Porous medium

double porous_phi(double r, double gamma) { return r * std::pow(std::abs(r), gamma); }

PorousMediumModel::PorousMediumModel(const PorousMediumOptions& opts, ModelConstants constants)
    : Model(negative_sobolev_space_1d(opts.nodes, (opts.gamma < 0.0 ? opts.p - 2.0 : opts.gamma) + 2.0),
            std::max<int>(1, static_cast<int>(opts.noise.size())), constants,
            opts.x0.size() != 0 ? opts.x0 : sine_profile(opts.nodes, opts.x0_amplitude)),
      opts_(opts),
      gamma_(opts.gamma < 0.0 ? opts.p - 2.0 : opts.gamma),
      mesh_(1.0 / (opts.nodes + 1)),
      laplacian_(dirichlet_laplacian(opts.nodes)) {
  if (!(opts.p >= 2.0)) throw ArgumentError("porous medium exponent p must be >= 2");
  if (opts.noise.empty()) throw ArgumentError("porous medium needs at least one cylindrical noise term");
  const auto n = static_cast<Eigen::Index>(opts.noise.size());
  directions_.resize(opts.nodes, n);
  functionals_.resize(opts.nodes, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const CylindricalTerm& term = opts.noise[static_cast<std::size_t>(k)];
    directions_.col(k) = sine_profile(opts.nodes, term.scale, term.direction_mode);
    functionals_.col(k) = sine_profile(opts.nodes, 1.0, term.functional_mode);
  }
}

double PorousMediumModel::phi(double r) const { return porous_phi(r, gamma_); }

// Δφ(x) with nodal values; as an H-Riesz vector this is −L φ(x).
DualVec PorousMediumModel::apply_a1(double, const StateVec& x) const {
  Vec ph(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) ph[i] = phi(x[i]);
  return -laplacian_ * ph;
}

Mat PorousMediumModel::jacobian_a(double, const StateVec& x) const {
  const double reg = opts_.jacobian_smoothing;
  Vec slope(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) slope[i] = (gamma_ + 1.0) * std::pow(x[i] * x[i] + reg * reg, 0.5 * gamma_);
  return -laplacian_ * slope.asDiagonal();
}

Mat PorousMediumModel::noise_matrix(double, const StateVec& x) const {
  Mat b(x.size(), directions_.cols());
  const Mat& gram = space().gram();
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    const CylindricalTerm& term = opts_.noise[static_cast<std::size_t>(k)];
    const double s = functionals_.col(k).dot(gram * x);
    b.col(k) = (term.amplitude + term.slope * std::tanh(s)) * directions_.col(k);
  }
  return b;
}

Mat PorousMediumModel::noise_derivative(double, const StateVec& x, const Vec& u) const {
  Mat jac = Mat::Zero(x.size(), x.size());
  const Mat& gram = space().gram();
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    const CylindricalTerm& term = opts_.noise[static_cast<std::size_t>(k)];
    const Vec ge = gram * functionals_.col(k);
    const double th = std::tanh(ge.dot(x));
    jac += (u[k] * term.slope * (1.0 - th * th)) * directions_.col(k) * ge.transpose();
  }
  return jac;
}

double PorousMediumModel::noise_lipschitz() const {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    const CylindricalTerm& term = opts_.noise[static_cast<std::size_t>(k)];
    const double ek = h_norm(space(), functionals_.col(k));
    const double bk = h_norm(space(), directions_.col(k));
    sum += std::pow(term.slope * ek * bk, 2);
  }
  return std::sqrt(sum);
}

double PorousMediumModel::noise_bound() const {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    const CylindricalTerm& term = opts_.noise[static_cast<std::size_t>(k)];
    sum += std::pow((std::abs(term.amplitude) + std::abs(term.slope)) * h_norm(space(), directions_.col(k)), 2);
  }
  return std::sqrt(sum);
}

std::shared_ptr<const PorousMediumModel> make_porous_medium(const PorousMediumOptions& opts) {
  const double gamma = opts.gamma < 0.0 ? opts.p - 2.0 : opts.gamma;
  const double q = gamma + 2.0;
  ModelConstants k;
  // [x, A(x)] = −h Σ x φ(x) = −‖x‖_q^q, with X1 = X2 = L^q
  k.lambda1 = k.lambda2 = 0.5;
  k.lambda3 = 1.0;
  k.lambda0 = 0.0;
  k.lambda1p = k.lambda2p = 0.25 * std::pow(2.0, 2.0 - q);
  k.c_a1 = k.c_a2 = 1.0;
  k.embedding = 1.0;
  k.beta1 = 1.0;
  auto probe = std::make_shared<PorousMediumModel>(opts, k);
  k.beta1 = std::max({probe->noise_lipschitz(), probe->noise_bound(), 1e-3}) * 1.01;
  return std::make_shared<PorousMediumModel>(opts, k);
}

// ---------------------------------------------------------------------------
// Counterexamples

namespace {

class ConstantsOverride final : public Model {
 public:
  ConstantsOverride(std::shared_ptr<const Model> base, const ModelConstants& constants)
      : Model(base->space(), base->noise_dim(), constants, base->x0()), base_(std::move(base)) {}

  std::string name() const override { return base_->name(); }
  DualVec apply_a1(double t, const StateVec& x) const override { return base_->apply_a1(t, x); }
  DualVec apply_a2(double t, const StateVec& x) const override { return base_->apply_a2(t, x); }
  Mat jacobian_a(double t, const StateVec& x) const override { return base_->jacobian_a(t, x); }
  Mat noise_matrix(double t, const StateVec& x) const override { return base_->noise_matrix(t, x); }
  Mat noise_derivative(double t, const StateVec& x, const Vec& u) const override {
    return base_->noise_derivative(t, x, u);
  }
  double b_hs_norm_sq(double t, const StateVec& x) const override { return base_->b_hs_norm_sq(t, x); }

 private:
  std::shared_ptr<const Model> base_;
};

}  // namespace

std::shared_ptr<const Model> with_constants(std::shared_ptr<const Model> base, const ModelConstants& constants) {
  if (!base) throw ArgumentError("with_constants: model is missing");
  return std::make_shared<ConstantsOverride>(std::move(base), constants);
}

namespace counterexamples {

namespace {

MonotoneSdeParams scalar_params(std::string name) {
  MonotoneSdeParams p;
  p.dim = 1;
  p.noise_dim = 1;
  p.sigma = [](double, const Vec&) -> Mat { return Mat::Identity(1, 1); };
  p.constants.lambda1 = p.constants.lambda2 = 0.25;
  p.constants.lambda3 = 1.0;
  p.constants.lambda1p = p.constants.lambda2p = 0.25;
  p.constants.c_a1 = p.constants.c_a2 = 1.0;
  p.constants.beta1 = 1.0;
  p.x0 = StateVec::Zero(1);
  p.name = std::move(name);
  return p;
}

}  // namespace

std::shared_ptr<const Model> sign_drift() {
  MonotoneSdeParams p = scalar_params("sign_drift");
  p.drift_x1 = [](double, const Vec& x) -> Vec {
    return Vec::Constant(1, x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0));
  };
  return std::make_shared<MonotoneSdeModel>(std::move(p));
}

std::shared_ptr<const Model> anti_coercive() {
  MonotoneSdeParams p = scalar_params("anti_coercive");
  p.drift_x1 = [](double, const Vec& x) -> Vec { return x; };
  return std::make_shared<MonotoneSdeModel>(std::move(p));
}

std::shared_ptr<const Model> anti_monotone_cubic() {
  MonotoneSdeParams p = scalar_params("anti_monotone_cubic");
  p.drift_x1 = [](double, const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  p.drift_x2 = [](double, const Vec& x) -> Vec { return x.array().cube().matrix(); };
  p.q2 = 4.0;
  p.constants.lambda0 = 0.0;
  p.constants.lambda1p = p.constants.lambda2p = 0.0;
  return std::make_shared<MonotoneSdeModel>(std::move(p));
}

std::shared_ptr<const Model> exponential_flux() {
  ReactionDiffusionOptions base;
  base.q1 = 2.0;
  base.q2 = 2.0;
  auto ref = make_reaction_diffusion(base);
  ReactionDiffusionParams p = ref->params();
  p.flux.value = [](double, double r) { return std::exp(r); };
  p.flux.slope = [](double, double r) { return std::exp(r); };
  p.name = "exponential_flux";
  return std::make_shared<ReactionDiffusionModel>(std::move(p));
}

std::shared_ptr<const Model> square_noise() {
  auto ref = make_reaction_diffusion(ReactionDiffusionOptions{});
  ReactionDiffusionParams p = ref->params();
  ScalarLaw sq;
  sq.value = [](double, double r) { return r * r; };
  sq.slope = [](double, double r) { return 2.0 * r; };
  p.noise_modes = {sq};
  p.name = "square_noise";
  return std::make_shared<ReactionDiffusionModel>(std::move(p));
}

}  // namespace counterexamples

}  // namespace fwm
