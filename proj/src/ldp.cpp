#include "fwm/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "fwm/errors.hpp"
#include "fwm/parallel.hpp"

namespace fwm {

void LdpExperiment::validate() const {
  if (!model) throw ArgumentError("LdpExperiment: model is missing");
  if (!event && !functional) throw ArgumentError("LdpExperiment: needs an event or a functional");
  if (eps_list.empty()) throw ArgumentError("LdpExperiment: eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0)) throw ArgumentError("LdpExperiment: eps must lie in (0, 1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw ArgumentError("LdpExperiment: eps_list must be strictly decreasing");
    }
  }
  if (n_samples < 100) throw ArgumentError("LdpExperiment: n_samples must be >= 100");
  if (!(functional_bound > 0.0)) throw ArgumentError("LdpExperiment: functional bound must be positive");
  if (!(T > 0.0)) throw ArgumentError("LdpExperiment: horizon must be positive");
  step.validate();
}

double zero_hit_bound(int n) { return 1.0 - std::pow(0.05, 1.0 / n); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Replica {
  double log_weight = 0.0;
  double log_term = kNegInf;  // log of the integrand before weighting
  bool clipped = false;
};

void check_eps(double eps) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
}

void check_shift(const LdpExperiment& exp, const ControlPath& h) {
  if (h.steps() != exp.step.K || h.modes() != exp.model->noise_dim()) {
    throw ArgumentError("shift shape does not match (K x m)");
  }
  if (std::abs(h.grid[h.steps()] - exp.T) > 1e-12 * exp.T) throw ArgumentError("shift grid horizon does not match T");
}

std::vector<Replica> run_replicas(const LdpExperiment& exp, double eps, const std::optional<ControlPath>& shift,
                                  std::uint64_t stream, bool laplace) {
  exp.validate();
  check_eps(eps);
  if (shift) check_shift(exp, *shift);
  QWienerSpec spec;
  spec.m = exp.model->noise_dim();
  spec.T = exp.T;
  spec.K = exp.step.K;
  const double cm = shift ? cm_norm_sq(*shift) : 0.0;
  const double inv_sqrt_eps = 1.0 / std::sqrt(eps);

  std::vector<Replica> out(static_cast<std::size_t>(exp.n_samples));
  parallel_for(out.size(), exp.threads, [&](std::size_t i) {
    const std::uint64_t index = (stream << 32) | static_cast<std::uint64_t>(i);
    std::mt19937_64 rng = replica_rng(exp.master_seed, index);
    const BrownianPath noise = sample_brownian(spec, rng, index);
    const PathSample path = simulate_sde(*exp.model, eps, exp.step, noise, shift);
    Replica r;
    if (shift) {
      double dot = 0.0;
      for (int k = 0; k < noise.steps(); ++k) dot += shift->hdot.row(k).dot(noise.increments.row(k));
      r.log_weight = -inv_sqrt_eps * dot - cm / (2.0 * eps);
    }
    if (laplace) {
      double g = exp.functional(path);
      if (std::isnan(g)) throw NumericRangeError("functional returned NaN", 0.0);
      if (std::abs(g) > exp.functional_bound) {
        r.clipped = true;
        g = std::clamp(g, -exp.functional_bound, exp.functional_bound);
      }
      r.log_term = -g / eps;
    } else {
      r.log_term = exp.event(path) ? 0.0 : kNegInf;
    }
    out[i] = r;
  });
  return out;
}

McEstimate reduce(const std::vector<Replica>& reps, bool weighted, bool laplace) {
  McEstimate est;
  est.n = static_cast<int>(reps.size());
  est.importance_sampled = weighted;
  const double n = static_cast<double>(reps.size());

  double w_max = kNegInf;
  double y_max = kNegInf;
  for (const Replica& r : reps) {
    w_max = std::max(w_max, r.log_weight);
    y_max = std::max(y_max, r.log_term + r.log_weight);
    if (r.log_term > kNegInf) ++est.hits;
    if (r.clipped) ++est.clipped;
  }

  double sw = 0.0, sw2 = 0.0;
  for (const Replica& r : reps) {
    const double w = std::exp(r.log_weight - w_max);
    sw += w;
    sw2 += w * w;
  }
  est.ess = weighted ? sw * sw / sw2 : n;

  if (!laplace && est.hits == 0) {
    est.zero_hits = true;
    est.upper_bound = zero_hit_bound(est.n);
    est.log_value = kNegInf;
    return est;
  }

  // z_i = y_i / e^{y_max}
  double sz = 0.0, sz2 = 0.0;
  for (const Replica& r : reps) {
    const double z = std::exp(r.log_term + r.log_weight - y_max);
    sz += z;
    sz2 += z * z;
  }
  const double mean_z = sz / n;
  const double var_z = std::max(0.0, (sz2 - sz * sz / n) / (n - 1.0));
  const double scale = std::exp(y_max);
  est.log_value = y_max + std::log(mean_z);
  est.value = scale * mean_z;
  est.std_error = scale * std::sqrt(var_z / n);
  return est;
}

}  // namespace

McEstimate estimate_event_prob(const LdpExperiment& exp, double eps, std::uint64_t stream) {
  if (!exp.event) throw ArgumentError("estimate_event_prob: experiment has no event");
  return reduce(run_replicas(exp, eps, std::nullopt, stream, false), false, false);
}

McEstimate estimate_event_prob_is(const LdpExperiment& exp, double eps, const ControlPath& shift,
                                  std::uint64_t stream) {
  if (!exp.event) throw ArgumentError("estimate_event_prob_is: experiment has no event");
  return reduce(run_replicas(exp, eps, shift, stream, false), true, false);
}

McEstimate laplace_functional(const LdpExperiment& exp, double eps, const std::optional<ControlPath>& shift,
                              std::uint64_t stream) {
  if (!exp.functional) throw ArgumentError("laplace_functional: experiment has no functional");
  return reduce(run_replicas(exp, eps, shift, stream, true), shift.has_value(), true);
}

LdpCurve ldp_curve(const LdpExperiment& exp) {
  exp.validate();
  LdpCurve curve;
  curve.laplace_mode = exp.laplace_mode();
  for (std::size_t i = 0; i < exp.eps_list.size(); ++i) {
    LdpRow row;
    row.eps = exp.eps_list[i];
    const bool use_shift = exp.shift && row.eps <= exp.is_threshold;
    try {
      if (curve.laplace_mode) {
        row.estimate = laplace_functional(exp, row.eps, use_shift ? exp.shift : std::nullopt, i);
      } else if (use_shift) {
        row.estimate = estimate_event_prob_is(exp, row.eps, *exp.shift, i);
      } else {
        row.estimate = estimate_event_prob(exp, row.eps, i);
      }
      const McEstimate& e = row.estimate;
      if (e.zero_hits) {
        row.eps_log = row.eps * std::log(e.upper_bound);
        row.eps_log_stderr = 0.0;
      } else {
        row.eps_log = row.eps * e.log_value;
        row.eps_log_stderr = e.value > 0.0 ? row.eps * e.std_error / e.value : 0.0;
      }
    } catch (const std::exception& ex) {
      row.failure = ex.what();
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

void write_ldp_csv(std::ostream& os, const LdpCurve& curve, int precision) {
  os << "eps,estimate,stderr,eps_log,eps_log_stderr,ess,is,zero_hits\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return std::string(buf);
  };
  for (const LdpRow& r : curve.rows) {
    if (r.failure) {
      os << num(r.eps) << ",nan,nan,nan,nan,nan,0,0\n";
      continue;
    }
    const McEstimate& e = r.estimate;
    os << num(r.eps) << ',' << num(e.zero_hits ? e.upper_bound : e.value) << ',' << num(e.std_error) << ','
       << num(r.eps_log) << ',' << num(r.eps_log_stderr) << ',' << num(e.ess) << ',' << (e.importance_sampled ? 1 : 0)
       << ',' << (e.zero_hits ? 1 : 0) << '\n';
  }
}

}  // namespace fwm
