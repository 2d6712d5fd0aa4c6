#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "fwm/triple.hpp"

namespace fwm {

/// Truncated Q-Wiener process in U_Q-orthonormal coordinates on a uniform grid.
struct QWienerSpec {
  int m = 1;          // retained modes
  Vec mode_scales;    // per-mode standard-deviation multipliers; all ones when empty
  double T = 1.0;
  int K = 1;

  void validate() const;
  double dt() const { return T / K; }
  Vec grid() const;
};

/// Piecewise-constant control ḣ on a time grid. hdot has K rows and m columns.
struct ControlPath {
  Vec grid;  // K+1 points
  Mat hdot;

  static ControlPath zeros(double T, int K, int m);
  static ControlPath constant(double T, int K, const Vec& value);

  int steps() const { return static_cast<int>(hdot.rows()); }
  int modes() const { return static_cast<int>(hdot.cols()); }
  double dt(int k) const { return grid[k + 1] - grid[k]; }
};

struct BrownianPath {
  Vec grid;         // K+1 points
  Mat increments;   // K×m
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(increments.rows()); }
  int modes() const { return static_cast<int>(increments.cols()); }
};

/// Independent generator for replica `index` of a run with `master_seed`.
std::mt19937_64 replica_rng(std::uint64_t master_seed, std::uint64_t index);

BrownianPath sample_brownian(const QWienerSpec& spec, std::uint64_t seed);

/// Draws increments from an existing generator (used by replica loops).
BrownianPath sample_brownian(const QWienerSpec& spec, std::mt19937_64& rng, std::uint64_t seed_tag = 0);

/// Sums consecutive pairs of increments (K must be even): the same Brownian
/// realization on a grid with half as many steps.
BrownianPath coarsen(const BrownianPath& fine);

/// Σ_k ‖ḣ_k‖²·Δt_k.
double cm_norm_sq(const ControlPath& h);

/// Radial projection onto the ball {cm_norm_sq <= N}.
ControlPath project_ball(const ControlPath& h, double N);

/// CSV with header `t,hdot_1,...,hdot_m` and K+1 rows. The last row carries
/// t_K and repeats the final control value; readers ignore its control entries.
void write_control_csv(std::ostream& os, const ControlPath& h, int precision = 17);
ControlPath read_control_csv(std::istream& is);

}  // namespace fwm
