#pragma once

// Randomized empirical checks of the standing hypotheses on a model:
// hemicontinuity, weak coercivity, weak monotonicity, boundedness and the
// Lipschitz/growth bound of the noise coefficient.
//
// Each check evaluates a defect per sample (<= 0 means the inequality holds
// there) and reports the worst one. Samples are drawn from a generator
// seeded by (seed, sample index), so any witness can be regenerated.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwm/model.hpp"

namespace fwm {

struct SamplerConfig {
  double radius = 10.0;
  std::uint64_t seed = 1;
  /// Prepends the zero state and radius·e_i for each basis vector.
  bool include_deterministic = true;
  double T = 1.0;
};

struct SampleDraw {
  std::size_t index = 0;
  double t = 0.0;
  std::vector<StateVec> points;
};

/// Gaussian states in Galerkin coordinates, x = radius·z/√d.
class StateSampler {
 public:
  StateSampler(int dim, SamplerConfig config);
  SampleDraw draw(std::size_t index, int count) const;
  const SamplerConfig& config() const { return config_; }

 private:
  int dim_;
  SamplerConfig config_;
};

struct CheckOptions {
  int threads = 1;
  int hemi_coarse_level = 4;   // first grid 2^-coarse
  int hemi_fine_level = 12;    // finest grid 2^-fine
  double hemi_tolerance = 1e-6;
  double hemi_ratio = 0.70710678118654752;  // jumps must shrink at least like 2^{-1/2}
  DualNormOptions dual;
};

struct CheckReport {
  std::string hypothesis;
  int n_samples = 0;
  double worst_violation = 0.0;
  std::uint64_t seed = 0;
  SampleDraw witness;
  std::map<std::string, double> fitted_constants;

  bool passed() const { return worst_violation <= 0.0; }
};

/// Model evaluation failed on a sample; identifies it for replay.
class CheckEvaluationError : public std::runtime_error {
 public:
  CheckEvaluationError(const std::string& hypothesis, const SampleDraw& draw, const std::string& cause);
  const SampleDraw& witness() const { return witness_; }

 private:
  SampleDraw witness_;
};

CheckReport check_hemicontinuity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts = {});
CheckReport check_coercivity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts = {});
CheckReport check_monotonicity(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts = {});
CheckReport check_boundedness(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts = {});
CheckReport check_noise_lipschitz(const Model& model, const StateSampler& sampler, int n, const CheckOptions& opts = {});

/// All five checks, in hypothesis order H1..H5.
std::vector<CheckReport> check_all(const Model& model, const SamplerConfig& sampler, int n, const CheckOptions& opts = {});

}  // namespace fwm
