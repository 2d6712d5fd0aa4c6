#include "fwm/hypothesis.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "fwm/errors.hpp"
#include "fwm/noise.hpp"
#include "fwm/parallel.hpp"

namespace fwm {

StateSampler::StateSampler(int dim, SamplerConfig config) : dim_(dim), config_(config) {
  if (dim_ < 1) throw ArgumentError("sampler dimension must be positive");
  if (!(config_.radius > 0.0)) throw ArgumentError("sampler radius must be positive");
}

SampleDraw StateSampler::draw(std::size_t index, int count) const {
  SampleDraw out;
  out.index = index;
  std::mt19937_64 rng = replica_rng(config_.seed, index);
  std::uniform_real_distribution<double> uni(0.0, config_.T);
  out.t = uni(rng);
  const std::size_t n_fixed = config_.include_deterministic ? static_cast<std::size_t>(dim_) + 1 : 0;
  if (index < n_fixed) {
    out.points.assign(static_cast<std::size_t>(count), StateVec::Zero(dim_));
    if (index > 0) out.points[0][static_cast<Eigen::Index>(index - 1)] = config_.radius;
    return out;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = config_.radius / std::sqrt(static_cast<double>(dim_));
  for (int c = 0; c < count; ++c) {
    StateVec x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = scale * normal(rng);
    out.points.push_back(std::move(x));
  }
  return out;
}

CheckEvaluationError::CheckEvaluationError(const std::string& hypothesis, const SampleDraw& draw,
                                           const std::string& cause)
    : std::runtime_error(hypothesis + ": model evaluation failed on sample " + std::to_string(draw.index) + ": " +
                         cause),
      witness_(draw) {}

namespace {

struct Outcome {
  double defect = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::string, double>> fits;
};

template <class Eval>
CheckReport run_check(const std::string& name, const StateSampler& sampler, int n, int points, int threads,
                      Eval&& eval) {
  if (n < 1) throw ArgumentError(name + ": need at least one sample");
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n));
  std::vector<SampleDraw> draws(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    draws[i] = sampler.draw(i, points);
    try {
      outcomes[i] = eval(draws[i]);
    } catch (const std::exception& e) {
      throw CheckEvaluationError(name, draws[i], e.what());
    }
  });

  CheckReport report;
  report.hypothesis = name;
  report.n_samples = n;
  report.seed = sampler.config().seed;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (std::isnan(o.defect)) throw CheckEvaluationError(name, draws[i], "defect is NaN");
    if (o.defect > report.worst_violation || i == 0) {
      report.worst_violation = o.defect;
      report.witness = draws[i];
    }
    for (const auto& [key, value] : o.fits) {
      auto it = report.fitted_constants.find(key);
      if (it == report.fitted_constants.end() || value > it->second) report.fitted_constants[key] = value;
    }
  }
  return report;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : -std::numeric_limits<double>::infinity(); }

}  // namespace

CheckReport check_hemicontinuity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts) {
  if (opts.hemi_coarse_level < 1 || opts.hemi_fine_level < opts.hemi_coarse_level + 4) {
    throw ArgumentError("hemicontinuity: need fine level >= coarse level + 4");
  }
  const SpaceSpec& space = model.space();
  const int fine = opts.hemi_fine_level;
  const std::size_t npts = (std::size_t{1} << fine) + 1;

  return run_check("H1_hemicontinuity", sampler, n, 3, opts.threads, [&](const SampleDraw& draw) {
    const StateVec& x = draw.points[0];
    const StateVec& y = draw.points[1];
    const StateVec& z = draw.points[2];
    const Vec gx = space.gram() * x;
    std::vector<double> values(npts);
    double modulus = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
      const double e = static_cast<double>(i) / static_cast<double>(npts - 1);
      values[i] = gx.dot(model.apply_a(draw.t, y + e * z));
      modulus = std::max(modulus, std::abs(values[i]));
    }
    // largest adjacent jump on the grid of spacing 2^-level
    auto jump = [&](int level) {
      const std::size_t stride = std::size_t{1} << (fine - level);
      double j = 0.0;
      for (std::size_t i = 0; i + stride < npts; i += stride) j = std::max(j, std::abs(values[i + stride] - values[i]));
      return j;
    };
    const double j_fine = jump(fine);
    const double j_prev = jump(fine - 4);
    const double ratio = j_prev > 0.0 ? std::pow(j_fine / j_prev, 0.25) : 0.0;
    const double tol = opts.hemi_tolerance * (1.0 + modulus);
    Outcome o;
    o.defect = (ratio > opts.hemi_ratio && j_fine > tol) ? j_fine - tol : 0.0;
    o.fits.emplace_back("jump_ratio", ratio);
    return o;
  });
}

CheckReport check_coercivity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts) {
  const SpaceSpec& space = model.space();
  const ModelConstants& k = model.constants();
  return run_check("H2_coercivity", sampler, n, 1, opts.threads, [&](const SampleDraw& draw) {
    const StateVec& x = draw.points[0];
    const double lhs = pairing(space, x, model.apply_a(draw.t, x)) +
                       k.lambda1 * std::pow(x_norm(space, x, 1), space.q1()) +
                       k.lambda2 * std::pow(x_norm(space, x, 2), space.q2());
    const double h2 = h_inner(space, x, x) + 1.0;
    Outcome o;
    o.defect = lhs - k.lambda3 * h2;
    o.fits.emplace_back("lambda3", lhs / h2);
    return o;
  });
}

CheckReport check_monotonicity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts) {
  const SpaceSpec& space = model.space();
  const ModelConstants& k = model.constants();
  return run_check("H3_monotonicity", sampler, n, 2, opts.threads, [&](const SampleDraw& draw) {
    const StateVec& x = draw.points[0];
    const StateVec& y = draw.points[1];
    const StateVec diff = x - y;
    const double lhs = pairing(space, diff, model.apply_a(draw.t, x) - model.apply_a(draw.t, y)) +
                       k.lambda1p * std::pow(x_norm(space, diff, 1), space.q1()) +
                       k.lambda2p * std::pow(x_norm(space, diff, 2), space.q2());
    const double h2 = h_inner(space, diff, diff);
    Outcome o;
    o.defect = lhs - k.lambda0 * h2;
    o.fits.emplace_back("lambda0", safe_ratio(lhs, h2));
    return o;
  });
}

CheckReport check_boundedness(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts) {
  const SpaceSpec& space = model.space();
  const ModelConstants& k = model.constants();
  return run_check("H4_boundedness", sampler, n, 1, opts.threads, [&](const SampleDraw& draw) {
    const StateVec& x = draw.points[0];
    Outcome o;
    for (int i = 1; i <= 2; ++i) {
      const DualVec a = i == 1 ? model.apply_a1(draw.t, x) : model.apply_a2(draw.t, x);
      if (!a.allFinite()) throw NumericRangeError("A_" + std::to_string(i) + " is not finite", x.norm());
      DualNormOptions dopts = opts.dual;
      dopts.which = i;
      const double dual = dual_norm_estimate(space, a, dopts);
      const double growth = std::pow(x_norm(space, x, i), space.recipe(i).q - 1.0) + 1.0;
      const double c = i == 1 ? k.c_a1 : k.c_a2;
      o.defect = std::max(o.defect, dual - c * growth);
      o.fits.emplace_back(i == 1 ? "c_a1" : "c_a2", dual / growth);
    }
    return o;
  });
}

CheckReport check_noise_lipschitz(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts) {
  const SpaceSpec& space = model.space();
  const double beta = model.constants().beta1;
  return run_check("H5_noise_lipschitz", sampler, n, 2, opts.threads, [&](const SampleDraw& draw) {
    const StateVec& x = draw.points[0];
    const StateVec& y = draw.points[1];
    const double lip = std::sqrt(std::max(0.0, b_hs_distance_sq(model, draw.t, x, y)));
    const double dist = h_norm(space, x - y);
    const double hs = std::sqrt(std::max(0.0, model.b_hs_norm_sq(draw.t, x)));
    const double growth = 1.0 + h_norm(space, x);
    Outcome o;
    o.defect = std::max(lip - beta * dist, hs - beta * growth);
    o.fits.emplace_back("beta1", std::max(safe_ratio(lip, dist), hs / growth));
    return o;
  });
}

std::vector<CheckReport> check_all(const Model& model, const SamplerConfig& config, int n, const CheckOptions& opts) {
  const StateSampler sampler(model.dim(), config);
  return {check_hemicontinuity(model, sampler, n, opts), check_coercivity(model, sampler, n, opts),
          check_monotonicity(model, sampler, n, opts), check_boundedness(model, sampler, n, opts),
          check_noise_lipschitz(model, sampler, n, opts)};
}

}  // namespace fwm
