#include "fwm/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fwm/errors.hpp"

namespace fwm {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& what) {
  std::string where = "field " + (path.empty() ? std::string("<root>") : path);
  const YAML::Mark mark = node.Mark();
  if (!mark.is_null()) where = "line " + std::to_string(mark.line + 1) + ", " + where;
  throw ConfigError(where, what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double to_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected a number");
  const std::string& s = n.Scalar();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(n, path, "expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected an integer");
  const std::string& s = n.Scalar();
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(n, path, "expected an integer, got '" + s + "'");
  return v;
}

void read(const YAML::Node& n, const std::string& path, double& out) { out = to_double(n, path); }

void read(const YAML::Node& n, const std::string& path, int& out) {
  const long long v = to_integer(n, path);
  if (v < INT32_MIN || v > INT32_MAX) fail(n, path, "integer out of range");
  out = static_cast<int>(v);
}

void read(const YAML::Node& n, const std::string& path, std::uint64_t& out) {
  if (!n.IsScalar()) fail(n, path, "expected a non-negative integer");
  const std::string& s = n.Scalar();
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(n, path, "expected a non-negative integer, got '" + s + "'");
  }
}

void read(const YAML::Node& n, const std::string& path, bool& out) {
  if (!n.IsScalar() || (n.Scalar() != "true" && n.Scalar() != "false")) fail(n, path, "expected true or false");
  out = n.Scalar() == "true";
}

void read(const YAML::Node& n, const std::string& path, std::string& out) {
  if (!n.IsScalar()) fail(n, path, "expected a string");
  out = n.Scalar();
}

template <class T>
void read(const YAML::Node& n, const std::string& path, std::vector<T>& out) {
  if (!n.IsSequence()) fail(n, path, "expected a list");
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    T v{};
    read(n[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(v);
  }
}

template <class T>
void read(const YAML::Node& n, const std::string& path, std::optional<T>& out) {
  T v{};
  read(n, path, v);
  out = std::move(v);
}

/// Reads the keys of one mapping and rejects the rest.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    read(child(key), path(key), out);
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!has(key)) fail(node_, path_, "missing required key '" + key + "'");
    get(key, out);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, join(path_, key), "unknown key");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::set<std::string> kConstantKeys{"lambda1", "lambda2", "lambda3", "lambda0", "lambda1p",
                                          "lambda2p", "c_a1",    "c_a2",    "beta1",   "embedding"};

ModelBlock read_model(MapReader& root) {
  ModelBlock m;
  if (!root.has("model")) fail(root.node(), "", "missing required block 'model'");
  MapReader r(root.child("model"), "model");
  r.require("name", m.name);
  MapReader p(r.has("params") ? r.child("params") : YAML::Node(), r.path("params"));
  if (m.name == "ou") {
    OuParams o;
    p.get("a", o.a);
    p.get("s", o.s);
    p.get("x0", o.x0);
    m.params = o;
  } else if (m.name == "polynomial") {
    PolynomialParams o;
    p.get("dim", o.dim);
    p.get("linear_rate", o.linear_rate);
    p.get("cubic_rate", o.cubic_rate);
    p.get("additive_noise", o.additive_noise);
    p.get("tanh_noise", o.tanh_noise);
    p.get("x0", o.x0);
    m.params = o;
  } else if (m.name == "reaction_diffusion") {
    ReactionDiffusionConfig o;
    p.get("nodes", o.nodes);
    p.get("q1", o.q1);
    p.get("q2", o.q2);
    p.get("multiplicative_noise", o.multiplicative_noise);
    p.get("additive_noise", o.additive_noise);
    p.get("x0_amplitude", o.x0_amplitude);
    p.get("jacobian_smoothing", o.jacobian_smoothing);
    m.params = o;
  } else if (m.name == "porous_medium") {
    PorousMediumConfig o;
    p.get("nodes", o.nodes);
    p.get("p", o.p);
    p.get("gamma", o.gamma);
    p.get("x0_amplitude", o.x0_amplitude);
    p.get("jacobian_smoothing", o.jacobian_smoothing);
    p.get("x0", o.x0);
    if (p.has("noise")) {
      const YAML::Node seq = p.child("noise");
      const std::string base = p.path("noise");
      if (!seq.IsSequence()) fail(seq, base, "expected a list of noise terms");
      o.noise.clear();
      for (std::size_t i = 0; i < seq.size(); ++i) {
        MapReader t(seq[i], base + "[" + std::to_string(i) + "]");
        NoiseTermConfig term;
        t.get("amplitude", term.amplitude);
        t.get("slope", term.slope);
        t.get("direction_mode", term.direction_mode);
        t.get("functional_mode", term.functional_mode);
        t.get("scale", term.scale);
        t.finish();
        o.noise.push_back(term);
      }
    }
    m.params = o;
  } else if (m.name == "custom") {
    CustomParams o;
    p.require("variant", o.variant);
    m.params = o;
  } else {
    fail(r.child("name"), r.path("name"),
         "unknown model '" + m.name + "' (expected ou, polynomial, reaction_diffusion, porous_medium or custom)");
  }
  p.finish();
  if (r.has("constants")) {
    MapReader c(r.child("constants"), r.path("constants"));
    for (const std::string& key : kConstantKeys) {
      if (c.has(key)) {
        double v = 0.0;
        c.get(key, v);
        m.constants[key] = v;
      }
    }
    c.finish();
  }
  r.finish();
  return m;
}

TaskParams read_task(MapReader& root) {
  if (!root.has("task")) fail(root.node(), "", "missing required block 'task'");
  MapReader r(root.child("task"), "task");
  std::string kind;
  r.require("kind", kind);
  TaskParams out;
  if (kind == "simulate") {
    SimulateTask t;
    r.get("eps", t.eps);
    r.get("replicas", t.replicas);
    out = t;
  } else if (kind == "skeleton") {
    SkeletonTask t;
    r.get("control_csv", t.control_csv);
    out = t;
  } else if (kind == "minact") {
    MinactTask t;
    r.get("target", t.target);
    r.get("target_path_csv", t.target_path_csv);
    r.get("penalty_delta", t.penalty_delta);
    r.get("delta_schedule", t.delta_schedule);
    r.get("max_iters", t.max_iters);
    r.get("grad_tol", t.grad_tol);
    r.get("memory", t.memory);
    r.get("ball_radius", t.ball_radius);
    r.get("initial_control_csv", t.initial_control_csv);
    if (t.target.empty() == !t.target_path_csv) {
      fail(r.node(), "task", "exactly one of 'target' and 'target_path_csv' is required");
    }
    out = t;
  } else if (kind == "mc-ldp") {
    McLdpTask t;
    r.require("eps_list", t.eps_list);
    r.get("n_samples", t.n_samples);
    if (r.has("event")) {
      MapReader e(r.child("event"), "task.event");
      EventConfig ev;
      e.require("kind", ev.kind);
      if (ev.kind == "terminal_halfspace") {
        e.require("direction", ev.direction);
        e.require("threshold", ev.threshold);
      } else if (ev.kind == "terminal_ball") {
        e.require("center", ev.center);
        e.require("radius", ev.radius);
      } else if (ev.kind != "always") {
        fail(e.child("kind"), "task.event.kind",
             "unknown event '" + ev.kind + "' (expected terminal_halfspace, terminal_ball or always)");
      }
      e.finish();
      t.event = ev;
    }
    if (r.has("functional")) {
      MapReader f(r.child("functional"), "task.functional");
      FunctionalConfig fn;
      f.require("kind", fn.kind);
      if (fn.kind != "terminal_quadratic") {
        fail(f.child("kind"), "task.functional.kind", "unknown functional '" + fn.kind + "'");
      }
      f.require("target", fn.target);
      f.get("cap", fn.cap);
      f.finish();
      t.functional = fn;
    }
    if (!t.event && !t.functional) fail(r.node(), "task", "mc-ldp needs an 'event' or a 'functional'");
    r.get("shift_csv", t.shift_csv);
    r.get("is_threshold", t.is_threshold);
    r.get("reference_rate", t.reference_rate);
    out = t;
  } else if (kind == "check-hypotheses") {
    CheckTask t;
    r.get("n_samples", t.n_samples);
    r.get("radius", t.radius);
    r.get("hemi_coarse_level", t.hemi_coarse_level);
    r.get("hemi_fine_level", t.hemi_fine_level);
    r.get("hemi_tolerance", t.hemi_tolerance);
    out = t;
  } else {
    fail(r.child("kind"), "task.kind",
         "unknown task '" + kind + "' (expected simulate, skeleton, minact, mc-ldp or check-hypotheses)");
  }
  r.finish();
  return out;
}

// ---- emission ----

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit(YAML::Emitter& e, double v) { e << fmt(v); }
void emit(YAML::Emitter& e, int v) { e << v; }
void emit(YAML::Emitter& e, std::uint64_t v) { e << std::to_string(v); }
void emit(YAML::Emitter& e, bool v) { e << (v ? "true" : "false"); }
void emit(YAML::Emitter& e, const std::string& v) { e << YAML::DoubleQuoted << v; }

void emit(YAML::Emitter& e, const std::vector<double>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double x : v) e << fmt(x);
  e << YAML::EndSeq;
}

template <class T>
void kv(YAML::Emitter& e, const char* key, const T& v) {
  e << YAML::Key << key << YAML::Value;
  emit(e, v);
}

template <class T>
void kv(YAML::Emitter& e, const char* key, const std::optional<T>& v) {
  if (v) kv(e, key, *v);
}

struct ParamsEmitter {
  YAML::Emitter& e;
  void operator()(const OuParams& p) const {
    kv(e, "a", p.a);
    kv(e, "s", p.s);
    kv(e, "x0", p.x0);
  }
  void operator()(const PolynomialParams& p) const {
    kv(e, "dim", p.dim);
    kv(e, "linear_rate", p.linear_rate);
    kv(e, "cubic_rate", p.cubic_rate);
    kv(e, "additive_noise", p.additive_noise);
    kv(e, "tanh_noise", p.tanh_noise);
    kv(e, "x0", p.x0);
  }
  void operator()(const ReactionDiffusionConfig& p) const {
    kv(e, "nodes", p.nodes);
    kv(e, "q1", p.q1);
    kv(e, "q2", p.q2);
    kv(e, "multiplicative_noise", p.multiplicative_noise);
    kv(e, "additive_noise", p.additive_noise);
    kv(e, "x0_amplitude", p.x0_amplitude);
    kv(e, "jacobian_smoothing", p.jacobian_smoothing);
  }
  void operator()(const PorousMediumConfig& p) const {
    kv(e, "nodes", p.nodes);
    kv(e, "p", p.p);
    kv(e, "gamma", p.gamma);
    e << YAML::Key << "noise" << YAML::Value << YAML::BeginSeq;
    for (const NoiseTermConfig& t : p.noise) {
      e << YAML::Flow << YAML::BeginMap;
      kv(e, "amplitude", t.amplitude);
      kv(e, "slope", t.slope);
      kv(e, "direction_mode", t.direction_mode);
      kv(e, "functional_mode", t.functional_mode);
      kv(e, "scale", t.scale);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    kv(e, "x0_amplitude", p.x0_amplitude);
    kv(e, "jacobian_smoothing", p.jacobian_smoothing);
    kv(e, "x0", p.x0);
  }
  void operator()(const CustomParams& p) const { kv(e, "variant", p.variant); }
};

struct TaskEmitter {
  YAML::Emitter& e;
  void operator()(const SimulateTask& t) const {
    kv(e, "eps", t.eps);
    kv(e, "replicas", t.replicas);
  }
  void operator()(const SkeletonTask& t) const { kv(e, "control_csv", t.control_csv); }
  void operator()(const MinactTask& t) const {
    if (!t.target.empty()) kv(e, "target", t.target);
    kv(e, "target_path_csv", t.target_path_csv);
    kv(e, "penalty_delta", t.penalty_delta);
    kv(e, "delta_schedule", t.delta_schedule);
    kv(e, "max_iters", t.max_iters);
    kv(e, "grad_tol", t.grad_tol);
    kv(e, "memory", t.memory);
    kv(e, "ball_radius", t.ball_radius);
    kv(e, "initial_control_csv", t.initial_control_csv);
  }
  void operator()(const McLdpTask& t) const {
    kv(e, "eps_list", t.eps_list);
    kv(e, "n_samples", t.n_samples);
    if (t.event) {
      const EventConfig& ev = *t.event;
      e << YAML::Key << "event" << YAML::Value << YAML::BeginMap;
      kv(e, "kind", ev.kind);
      if (ev.kind == "terminal_halfspace") {
        kv(e, "direction", ev.direction);
        kv(e, "threshold", ev.threshold);
      } else if (ev.kind == "terminal_ball") {
        kv(e, "center", ev.center);
        kv(e, "radius", ev.radius);
      }
      e << YAML::EndMap;
    }
    if (t.functional) {
      e << YAML::Key << "functional" << YAML::Value << YAML::BeginMap;
      kv(e, "kind", t.functional->kind);
      kv(e, "target", t.functional->target);
      kv(e, "cap", t.functional->cap);
      e << YAML::EndMap;
    }
    kv(e, "shift_csv", t.shift_csv);
    kv(e, "is_threshold", t.is_threshold);
    kv(e, "reference_rate", t.reference_rate);
  }
  void operator()(const CheckTask& t) const {
    kv(e, "n_samples", t.n_samples);
    kv(e, "radius", t.radius);
    kv(e, "hemi_coarse_level", t.hemi_coarse_level);
    kv(e, "hemi_fine_level", t.hemi_fine_level);
    kv(e, "hemi_tolerance", t.hemi_tolerance);
  }
};

}  // namespace

std::string task_name(const TaskParams& task) {
  struct Namer {
    std::string operator()(const SimulateTask&) const { return "simulate"; }
    std::string operator()(const SkeletonTask&) const { return "skeleton"; }
    std::string operator()(const MinactTask&) const { return "minact"; }
    std::string operator()(const McLdpTask&) const { return "mc-ldp"; }
    std::string operator()(const CheckTask&) const { return "check-hypotheses"; }
  };
  return std::visit(Namer{}, task);
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ", column " + std::to_string(e.mark.column + 1),
                      e.msg);
  }
  if (!doc || !doc.IsMap()) throw ConfigError("line 1", "configuration must be a mapping");

  ExperimentConfig c;
  MapReader root(doc, "");
  c.model = read_model(root);
  if (root.has("space")) {
    MapReader r(root.child("space"), "space");
    r.get("dim", c.space.dim);
    r.get("mesh", c.space.mesh);
    r.get("exponents", c.space.exponents);
    if (c.space.exponents && c.space.exponents->size() != 2) {
      fail(r.child("exponents"), "space.exponents", "expected [q1, q2]");
    }
    r.finish();
  }
  if (root.has("time")) {
    MapReader r(root.child("time"), "time");
    r.get("T", c.time.T);
    r.get("K", c.time.K);
    r.get("theta", c.time.theta);
    r.get("newton_tol", c.time.newton_tol);
    r.get("newton_max_iter", c.time.newton_max_iter);
    r.get("max_retry_depth", c.time.max_retry_depth);
    r.get("truncate_noise", c.time.truncate_noise);
    if (!(c.time.T > 0.0)) fail(r.child("T"), "time.T", "must be positive");
    if (c.time.K < 1) fail(r.child("K"), "time.K", "must be >= 1");
    r.finish();
  }
  if (root.has("noise")) {
    MapReader r(root.child("noise"), "noise");
    r.get("m", c.noise.m);
    r.get("master_seed", c.noise.master_seed);
    r.finish();
  }
  c.task = read_task(root);
  if (root.has("output")) {
    MapReader r(root.child("output"), "output");
    r.get("directory", c.output.directory);
    r.get("precision", c.output.precision);
    if (c.output.precision < 1 || c.output.precision > 17) {
      fail(r.child("precision"), "output.precision", "must lie in [1, 17]");
    }
    r.finish();
  }
  root.get("threads", c.threads);
  if (c.threads < 1) fail(root.child("threads"), "threads", "must be >= 1");
  root.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  kv(e, "name", c.model.name);
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  std::visit(ParamsEmitter{e}, c.model.params);
  e << YAML::EndMap;
  if (!c.model.constants.empty()) {
    e << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
    for (const auto& [key, value] : c.model.constants) kv(e, key.c_str(), value);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  if (c.space.dim || c.space.mesh || c.space.exponents) {
    e << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
    kv(e, "dim", c.space.dim);
    kv(e, "mesh", c.space.mesh);
    kv(e, "exponents", c.space.exponents);
    e << YAML::EndMap;
  }

  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  kv(e, "T", c.time.T);
  kv(e, "K", c.time.K);
  kv(e, "theta", c.time.theta);
  kv(e, "newton_tol", c.time.newton_tol);
  kv(e, "newton_max_iter", c.time.newton_max_iter);
  kv(e, "max_retry_depth", c.time.max_retry_depth);
  kv(e, "truncate_noise", c.time.truncate_noise);
  e << YAML::EndMap;

  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  kv(e, "m", c.noise.m);
  kv(e, "master_seed", c.noise.master_seed);
  e << YAML::EndMap;

  e << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  kv(e, "kind", task_name(c.task));
  std::visit(TaskEmitter{e}, c.task);
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  kv(e, "directory", c.output.directory);
  kv(e, "precision", c.output.precision);
  e << YAML::EndMap;

  kv(e, "threads", c.threads);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace fwm
