#include "fwm/runner.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fwm/errors.hpp"
#include "fwm/hypothesis.hpp"
#include "fwm/ldp.hpp"
#include "fwm/minaction.hpp"
#include "fwm/models.hpp"
#include "fwm/noise.hpp"
#include "fwm/solvers.hpp"

namespace fwm {

namespace fs = std::filesystem;

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::shared_ptr<const Model> build_model(const ModelBlock& block) {
  std::shared_ptr<const Model> model;
  if (const auto* p = std::get_if<OuParams>(&block.params)) {
    model = make_ou(p->a, p->s, p->x0);
  } else if (const auto* p = std::get_if<PolynomialParams>(&block.params)) {
    PolynomialSdeOptions o;
    o.dim = p->dim;
    o.linear_rate = p->linear_rate;
    o.cubic_rate = p->cubic_rate;
    o.additive_noise = p->additive_noise;
    o.tanh_noise = p->tanh_noise;
    if (!p->x0.empty()) o.x0 = Eigen::Map<const Vec>(p->x0.data(), static_cast<Eigen::Index>(p->x0.size()));
    model = make_polynomial_sde(o);
  } else if (const auto* p = std::get_if<ReactionDiffusionConfig>(&block.params)) {
    ReactionDiffusionOptions o;
    o.nodes = p->nodes;
    o.q1 = p->q1;
    o.q2 = p->q2;
    o.multiplicative_noise = p->multiplicative_noise;
    o.additive_noise = p->additive_noise;
    o.x0_amplitude = p->x0_amplitude;
    o.jacobian_smoothing = p->jacobian_smoothing;
    model = make_reaction_diffusion(o);
  } else if (const auto* p = std::get_if<PorousMediumConfig>(&block.params)) {
    PorousMediumOptions o;
    o.nodes = p->nodes;
    o.p = p->p;
    o.gamma = p->gamma;
    o.noise.clear();
    for (const NoiseTermConfig& t : p->noise) {
      o.noise.push_back({t.amplitude, t.slope, t.direction_mode, t.functional_mode, t.scale});
    }
    o.x0_amplitude = p->x0_amplitude;
    o.jacobian_smoothing = p->jacobian_smoothing;
    if (!p->x0.empty()) o.x0 = Eigen::Map<const Vec>(p->x0.data(), static_cast<Eigen::Index>(p->x0.size()));
    model = make_porous_medium(o);
  } else {
    const std::string& v = std::get<CustomParams>(block.params).variant;
    if (v == "sign_drift") {
      model = counterexamples::sign_drift();
    } else if (v == "anti_coercive") {
      model = counterexamples::anti_coercive();
    } else if (v == "anti_monotone_cubic") {
      model = counterexamples::anti_monotone_cubic();
    } else if (v == "exponential_flux") {
      model = counterexamples::exponential_flux();
    } else if (v == "square_noise") {
      model = counterexamples::square_noise();
    } else {
      throw ConfigError("field model.params.variant", "unknown custom model '" + v + "'");
    }
  }
  if (block.constants.empty()) return model;

  ModelConstants c = model->constants();
  const std::map<std::string, double*> slots{
      {"lambda1", &c.lambda1}, {"lambda2", &c.lambda2},   {"lambda3", &c.lambda3},
      {"lambda0", &c.lambda0}, {"lambda1p", &c.lambda1p}, {"lambda2p", &c.lambda2p},
      {"c_a1", &c.c_a1},       {"c_a2", &c.c_a2},         {"beta1", &c.beta1},
      {"embedding", &c.embedding}};
  for (const auto& [key, value] : block.constants) {
    const auto it = slots.find(key);
    if (it == slots.end()) throw ConfigError("field model.constants." + key, "unknown constant");
    *it->second = value;
  }
  return with_constants(model, c);
}

namespace {

std::optional<double> model_mesh(const Model& model) {
  if (const auto* rd = dynamic_cast<const ReactionDiffusionModel*>(&model)) return rd->mesh();
  if (const auto* pm = dynamic_cast<const PorousMediumModel*>(&model)) return pm->mesh();
  return std::nullopt;
}

}  // namespace

ExperimentConfig resolve_config(ExperimentConfig config, const RunOverrides& overrides) {
  if (overrides.seed) config.noise.master_seed = *overrides.seed;
  if (overrides.out) config.output.directory = *overrides.out;
  if (overrides.threads) {
    if (*overrides.threads < 1) throw ConfigError("--threads", "must be >= 1");
    config.threads = *overrides.threads;
  }
  if (overrides.target || overrides.delta_schedule || overrides.max_iters) {
    auto* t = std::get_if<MinactTask>(&config.task);
    if (!t) throw ConfigError("task.kind", "--target, --delta-schedule and --max-iters apply to minact only");
    if (overrides.target) {
      t->target = *overrides.target;
      t->target_path_csv.reset();
    }
    if (overrides.delta_schedule) t->delta_schedule = *overrides.delta_schedule;
    if (overrides.max_iters) t->max_iters = *overrides.max_iters;
  }

  std::shared_ptr<const Model> model;
  try {
    model = build_model(config.model);
  } catch (const ArgumentError& e) {
    throw ConfigError("field model.params", e.what());
  }
  const SpaceSpec& space = model->space();
  if (config.space.dim && *config.space.dim != model->dim()) {
    throw ConfigError("field space.dim", "declared " + std::to_string(*config.space.dim) + " but the model has " +
                                              std::to_string(model->dim()));
  }
  if (config.space.exponents) {
    const auto& q = *config.space.exponents;
    if (std::abs(q[0] - space.q1()) > 1e-12 || std::abs(q[1] - space.q2()) > 1e-12) {
      throw ConfigError("field space.exponents", "declared exponents do not match the model");
    }
  }
  if (config.space.mesh) {
    const auto mesh = model_mesh(*model);
    if (!mesh) throw ConfigError("field space.mesh", "model '" + config.model.name + "' has no spatial mesh");
    if (std::abs(*mesh - *config.space.mesh) > 1e-12) {
      throw ConfigError("field space.mesh", "declared mesh does not match the model");
    }
  }
  if (config.noise.m && *config.noise.m != model->noise_dim()) {
    throw ConfigError("field noise.m", "declared " + std::to_string(*config.noise.m) + " modes but the model has " +
                                           std::to_string(model->noise_dim()));
  }
  return config;
}

namespace {

std::string num(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string path_csv(const PathSample& path, int precision) {
  std::ostringstream os;
  os << 't';
  for (Eigen::Index i = 0; i < path.states.cols(); ++i) os << ",x_" << i + 1;
  os << '\n';
  for (Eigen::Index k = 0; k < path.states.rows(); ++k) {
    os << num(path.grid[k], precision);
    for (Eigen::Index i = 0; i < path.states.cols(); ++i) os << ',' << num(path.states(k, i), precision);
    os << '\n';
  }
  return os.str();
}

Mat read_states_csv(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(where, "empty path CSV");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw ConfigError(where + " line " + std::to_string(lineno), "bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(where + " line " + std::to_string(lineno), "ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) throw ConfigError(where, "path CSV needs t and at least one state");
  Mat states(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size() - 1));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 1; i < rows[k].size(); ++i) states(k, i - 1) = rows[k][i];
  }
  return states;
}

class Run {
 public:
  Run(const ExperimentConfig& config, std::ostream& log, const std::map<std::string, std::string>& inputs)
      : config_(config), log_(log), provided_(inputs), dir_(config.output.directory) {}

  int execute() {
    fs::create_directories(dir_);
    model_ = build_model(config_.model);
    step_.K = config_.time.K;
    step_.theta = config_.time.theta;
    step_.newton_tol = config_.time.newton_tol;
    step_.newton_max_iter = config_.time.newton_max_iter;
    step_.max_retry_depth = config_.time.max_retry_depth;
    step_.truncate_noise = config_.time.truncate_noise;
    step_.validate();

    int code = kExitOk;
    std::visit([&](const auto& task) { code = this->task(task); }, config_.task);
    write_manifest();
    return code;
  }

 private:
  std::string input(const std::string& field, const std::string& path) {
    std::string content;
    if (const auto it = provided_.find(path); it != provided_.end()) {
      content = it->second;
    } else {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ConfigError("field " + field, "cannot read '" + path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
    inputs_.push_back({field, path, content});
    return content;
  }

  ControlPath control_input(const std::string& field, const std::string& path) {
    std::istringstream is(input(field, path));
    ControlPath h = read_control_csv(is);
    if (h.steps() != step_.K || h.modes() != model_->noise_dim()) {
      throw ConfigError("field " + field, "control shape does not match time.K and the model's noise modes");
    }
    if (std::abs(h.grid[h.steps()] - config_.time.T) > 1e-9 * config_.time.T) {
      throw ConfigError("field " + field, "control horizon does not match time.T");
    }
    return h;
  }

  void output(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    out.close();
    outputs_.push_back({name, git_blob_sha1(content)});
  }

  int task(const SimulateTask& t) {
    if (!(t.eps > 0.0)) throw ConfigError("field task.eps", "must be positive");
    if (t.replicas < 1) throw ConfigError("field task.replicas", "must be >= 1");
    QWienerSpec spec;
    spec.m = model_->noise_dim();
    spec.T = config_.time.T;
    spec.K = step_.K;
    const SpaceSpec& space = model_->space();
    for (int r = 0; r < t.replicas; ++r) {
      std::mt19937_64 rng = replica_rng(config_.noise.master_seed, static_cast<std::uint64_t>(r));
      const BrownianPath noise = sample_brownian(spec, rng, static_cast<std::uint64_t>(r));
      PathSample path = simulate_sde(*model_, t.eps, step_, noise);
      char name[32];
      if (t.replicas == 1) {
        std::snprintf(name, sizeof name, "path.csv");
      } else {
        std::snprintf(name, sizeof name, "path_%04d.csv", r);
      }
      output(name, path_csv(path, config_.output.precision));
      log_ << name << ": |X(T)|_H=" << num(h_norm(space, path.terminal()), 8)
           << " int|X|_X1^q1=" << num(time_integral_x(space, path.states, path.grid, 1), 8)
           << " int|X|_X2^q2=" << num(time_integral_x(space, path.states, path.grid, 2), 8)
           << " energy_residual=" << num(energy_residual(*model_, path, noise), 8) << '\n';
    }
    return kExitOk;
  }

  int task(const SkeletonTask& t) {
    const ControlPath h = t.control_csv ? control_input("task.control_csv", *t.control_csv)
                                        : ControlPath::zeros(config_.time.T, step_.K, model_->noise_dim());
    const PathSample path = solve_skeleton(*model_, h, step_);
    output("path.csv", path_csv(path, config_.output.precision));
    log_ << "skeleton: |X(T)|_H=" << num(h_norm(model_->space(), path.terminal()), 8)
         << " action=" << num(0.5 * cm_norm_sq(h), 8) << '\n';
    return kExitOk;
  }

  int task(const MinactTask& t) {
    MinActionProblem p;
    p.model = model_;
    p.T = config_.time.T;
    p.step = step_;
    p.penalty_delta = t.penalty_delta;
    p.optimizer.max_iters = t.max_iters;
    p.optimizer.grad_tol = t.grad_tol;
    p.optimizer.memory = t.memory;
    p.optimizer.delta_schedule = t.delta_schedule;
    p.optimizer.ball_radius = t.ball_radius;
    if (t.initial_control_csv) p.optimizer.initial = control_input("task.initial_control_csv", *t.initial_control_csv);
    if (t.target_path_csv) {
      p.target = PathTarget{read_states_csv(input("task.target_path_csv", *t.target_path_csv), *t.target_path_csv)};
    } else {
      p.target = EndpointTarget{Eigen::Map<const Vec>(t.target.data(), static_cast<Eigen::Index>(t.target.size()))};
    }
    try {
      p.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("block task", e.what());
    }
    const RateEstimate est = minimize_action(p);
    const int prec = config_.output.precision;

    std::ostringstream hcsv;
    write_control_csv(hcsv, est.h_opt, prec);
    output("control.csv", hcsv.str());
    output("path.csv", path_csv(solve_skeleton(*model_, est.h_opt, step_), prec));
    std::ostringstream rate;
    rate << "value,objective,terminal_gap,iterations,converged,grad_norm\n"
         << num(est.value, prec) << ',' << num(est.objective, prec) << ',' << num(est.terminal_gap, prec) << ','
         << est.iterations << ',' << (est.converged ? 1 : 0) << ',' << num(est.grad_norm, prec) << '\n';
    output("rate.csv", rate.str());
    std::ostringstream stages;
    stages << "delta,value,terminal_gap,iterations,converged\n";
    for (const ContinuationStage& s : est.stages) {
      stages << num(s.delta, prec) << ',' << num(s.value, prec) << ',' << num(s.terminal_gap, prec) << ','
             << s.iterations << ',' << (s.converged ? 1 : 0) << '\n';
    }
    output("stages.csv", stages.str());

    log_ << "minact: I=" << num(est.value, 10) << " gap=" << num(est.terminal_gap, 4)
         << " iterations=" << est.iterations << " converged=" << (est.converged ? "yes" : "no") << '\n';
    if (!est.converged) {
      log_ << "minact: optimizer stopped before reaching the gradient tolerance (|grad|="
           << num(est.grad_norm, 4) << ")\n";
      return kExitOptimizer;
    }
    return kExitOk;
  }

  int task(const McLdpTask& t) {
    LdpExperiment e;
    e.model = model_;
    e.eps_list = t.eps_list;
    e.n_samples = t.n_samples;
    e.master_seed = config_.noise.master_seed;
    e.is_threshold = t.is_threshold;
    e.T = config_.time.T;
    e.step = step_;
    e.threads = config_.threads;
    const int d = model_->dim();
    const SpaceSpec& space = model_->space();
    auto vec = [&](const std::vector<double>& v, const std::string& field) {
      if (static_cast<int>(v.size()) != d) throw ConfigError("field " + field, "length must equal the model dimension");
      return Vec(Eigen::Map<const Vec>(v.data(), d));
    };
    if (t.event) {
      const EventConfig& ev = *t.event;
      if (ev.kind == "terminal_halfspace") {
        const Vec dir = vec(ev.direction, "task.event.direction");
        const double c = ev.threshold;
        e.event = [dir, c](const PathSample& p) { return p.terminal().dot(dir) >= c; };
      } else if (ev.kind == "terminal_ball") {
        const Vec center = vec(ev.center, "task.event.center");
        const double r = ev.radius;
        e.event = [center, r, &space](const PathSample& p) { return h_norm(space, p.terminal() - center) <= r; };
      } else {
        e.event = [](const PathSample&) { return true; };
      }
    }
    if (t.functional) {
      const Vec y = vec(t.functional->target, "task.functional.target");
      const double cap = t.functional->cap;
      e.functional = [y, cap, &space](const PathSample& p) {
        const double r = h_norm(space, p.terminal() - y);
        return std::min(cap, r * r);
      };
      e.functional_bound = cap;
    }
    if (t.shift_csv) e.shift = control_input("task.shift_csv", *t.shift_csv);
    try {
      e.validate();
    } catch (const ArgumentError& ex) {
      throw ConfigError("block task", ex.what());
    }

    const LdpCurve curve = ldp_curve(e);
    std::ostringstream csv;
    write_ldp_csv(csv, curve, config_.output.precision);
    output("ldp_curve.csv", csv.str());

    int failures = 0;
    for (const LdpRow& r : curve.rows) {
      if (r.failure) {
        ++failures;
        log_ << "mc-ldp: eps=" << num(r.eps, 6) << " failed: " << *r.failure << '\n';
      } else if (r.estimate.zero_hits) {
        log_ << "mc-ldp: eps=" << num(r.eps, 6) << " recorded no hits; reporting the 95% upper bound\n";
      } else if (r.estimate.clipped > 0) {
        log_ << "mc-ldp: eps=" << num(r.eps, 6) << " clipped " << r.estimate.clipped
             << " functional values to the declared bound\n";
      }
    }
    const LdpRow& last = curve.rows.back();
    if (!last.failure) {
      log_ << "mc-ldp summary: eps=" << num(last.eps, 6) << " eps_log=" << num(last.eps_log, 6) << " +- "
           << num(last.eps_log_stderr, 3);
      if (t.reference_rate) {
        const double ref = -*t.reference_rate;
        log_ << " reference=" << num(ref, 6) << " rel_err=" << num(std::abs(last.eps_log - ref) / std::abs(ref), 3);
      }
      log_ << '\n';
    }
    return failures > 0 ? kExitSolver : kExitOk;
  }

  int task(const CheckTask& t) {
    SamplerConfig sc;
    sc.radius = t.radius;
    sc.seed = config_.noise.master_seed;
    sc.T = config_.time.T;
    CheckOptions opts;
    opts.threads = config_.threads;
    opts.hemi_coarse_level = t.hemi_coarse_level;
    opts.hemi_fine_level = t.hemi_fine_level;
    opts.hemi_tolerance = t.hemi_tolerance;
    const std::vector<CheckReport> reports = check_all(*model_, sc, t.n_samples, opts);

    const int prec = config_.output.precision;
    std::ostringstream csv;
    csv << "hypothesis,n_samples,seed,worst_violation,passed,witness_index,witness_t,fitted\n";
    int failed = 0;
    for (const CheckReport& r : reports) {
      std::string fitted;
      for (const auto& [key, value] : r.fitted_constants) {
        if (!fitted.empty()) fitted += ';';
        fitted += key + "=" + num(value, prec);
      }
      csv << r.hypothesis << ',' << r.n_samples << ',' << r.seed << ',' << num(r.worst_violation, prec) << ','
          << (r.passed() ? 1 : 0) << ',' << r.witness.index << ',' << num(r.witness.t, prec) << ',' << fitted << '\n';
      log_ << r.hypothesis << ": " << (r.passed() ? "pass" : "FAIL") << " worst_violation="
           << num(r.worst_violation, 6) << " witness=" << r.witness.index << '\n';
      if (!r.passed()) ++failed;
    }
    output("hypotheses.csv", csv.str());
    if (failed > 0) {
      for (const CheckReport& r : reports) {
        if (!r.passed()) log_ << "check-hypotheses: " << r.hypothesis << " violated\n";
      }
      return kExitCheckFailed;
    }
    return kExitOk;
  }

  void write_manifest() {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "tool" << YAML::Value << "fwminact";
    e << YAML::Key << "task" << YAML::Value << task_name(config_.task);
    e << YAML::Key << "config" << YAML::Value << YAML::Load(serialize_config(config_));
    e << YAML::Key << "seeds" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "master_seed" << YAML::Value << std::to_string(config_.noise.master_seed);
    e << YAML::Key << "replica_streams" << YAML::Value << "mt19937_64 seeded by seed_seq(master_seed, stream, index)";
    e << YAML::EndMap;
    e << YAML::Key << "inputs" << YAML::Value << YAML::BeginSeq;
    for (const InputRecord& in : inputs_) {
      e << YAML::BeginMap;
      e << YAML::Key << "field" << YAML::Value << in.field;
      e << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << in.path;
      e << YAML::Key << "sha1" << YAML::Value << git_blob_sha1(in.content);
      e << YAML::Key << "content" << YAML::Value << YAML::Literal << in.content;
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "outputs" << YAML::Value << YAML::BeginSeq;
    for (const auto& [name, sha] : outputs_) {
      e << YAML::Flow << YAML::BeginMap << YAML::Key << "file" << YAML::Value << name << YAML::Key << "sha1"
        << YAML::Value << sha << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;
    std::ofstream out(dir_ / "manifest.yaml", std::ios::binary);
    out << e.c_str() << '\n';
  }

  struct InputRecord {
    std::string field, path, content;
  };

  const ExperimentConfig& config_;
  std::ostream& log_;
  const std::map<std::string, std::string>& provided_;
  fs::path dir_;
  std::shared_ptr<const Model> model_;
  StepConfig step_;
  std::vector<InputRecord> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

int classify(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckEvaluationError& e) {
    log << "check failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const NumericRangeError& e) {
    log << "solver error: " << e.what() << " (norm " << e.offending_norm() << ")\n";
    return kExitSolver;
  } catch (const OptimizerError& e) {
    log << "optimizer error: " << e.what() << '\n';
    return kExitOptimizer;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log, const std::map<std::string, std::string>& inputs) {
  return classify(log, [&] { return Run(config, log, inputs).execute(); });
}

int run_config_file(const std::string& path, const std::string& expected_task, const RunOverrides& overrides,
                    std::ostream& log) {
  return classify(log, [&] {
    ExperimentConfig config = load_config(path);
    if (!expected_task.empty() && task_name(config.task) != expected_task) {
      throw ConfigError("field task.kind",
                        "configuration is for '" + task_name(config.task) + "', not '" + expected_task + "'");
    }
    config = resolve_config(std::move(config), overrides);
    return Run(config, log, {}).execute();
  });
}

int replay_manifest(const std::string& manifest_path, const RunOverrides& overrides, std::ostream& log) {
  return classify(log, [&] {
    YAML::Node manifest;
    try {
      manifest = YAML::LoadFile(manifest_path);
    } catch (const YAML::Exception& e) {
      throw ConfigError(manifest_path, e.what());
    }
    if (!manifest["config"]) throw ConfigError(manifest_path, "manifest has no config block");
    YAML::Emitter cfg;
    cfg << manifest["config"];
    ExperimentConfig config = parse_config(cfg.c_str());

    std::map<std::string, std::string> inputs;
    for (const auto& in : manifest["inputs"]) {
      const std::string path = in["path"].as<std::string>();
      const std::string content = in["content"].as<std::string>();
      if (git_blob_sha1(content) != in["sha1"].as<std::string>()) {
        throw ConfigError(manifest_path, "embedded input '" + path + "' does not match its hash");
      }
      inputs[path] = content;
    }
    RunOverrides o;
    o.out = overrides.out;
    config = resolve_config(std::move(config), o);
    const int code = Run(config, log, inputs).execute();

    int mismatches = 0;
    const fs::path dir = config.output.directory;
    for (const auto& rec : manifest["outputs"]) {
      const std::string name = rec["file"].as<std::string>();
      std::ifstream f(dir / name, std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      if (!f || git_blob_sha1(ss.str()) != rec["sha1"].as<std::string>()) {
        log << "replay: " << name << " differs from the recorded output\n";
        ++mismatches;
      }
    }
    if (mismatches == 0) log << "replay: all outputs match the manifest\n";
    return mismatches > 0 ? kExitOther : code;
  });
}

}  // namespace fwm
