#include "opsteer/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"
#include "opsteer/feasibility.hpp"
#include "opsteer/rng.hpp"

namespace opsteer {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw Error(Errc::ConfigInvalid, "field '" + field + "': " + msg);
}

/// Typed access to one JSON object with the dotted path kept for messages.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return obj_.at(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      invalid(at(key), "required");
    }
    const json& v = obj_.at(key);
    if (!v.is_number()) invalid(at(key), "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      invalid(at(key), "required");
    }
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) invalid(at(key), "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback = 0) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      invalid(at(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      invalid(at(key), "required");
    }
    const json& v = obj_.at(key);
    if (!v.is_string()) invalid(at(key), "expected a string");
    return v.get<std::string>();
  }

  Vec vector(const std::string& key) const {
    const json& v = obj_.at(key);
    if (!v.is_array()) invalid(at(key), "expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
  }

  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) const {
    if (!has(key)) return fallback;
    const Vec v = vector(key);
    if (v.size() != 2) invalid(at(key), "expected [lo, hi]");
    return {v(0), v(1)};
  }

  Mat matrix(const std::string& key) const {
    const json& v = obj_.at(key);
    if (!v.is_array() || v.empty()) invalid(at(key), "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Mat out(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json& row = v[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) invalid(at(key), "expected a square matrix");
      for (Eigen::Index j = 0; j < rows; ++j) {
        if (!row[static_cast<std::size_t>(j)].is_number()) invalid(at(key), "expected numbers");
        out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
      }
    }
    return out;
  }

  Fields child(const std::string& key) const {
    static const json empty = json::object();
    return has(key) ? Fields(obj_.at(key), at(key)) : Fields(empty, at(key));
  }

 private:
  const json& obj_;
  std::string path_;
};

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json opt_vec_json(const std::optional<Vec>& v) { return v ? vec_json(*v) : json(nullptr); }

ControllerKind parse_controller(const std::string& s, const std::string& field) {
  if (s == "known-analytic") return ControllerKind::KnownAnalytic;
  if (s == "adaptive-online") return ControllerKind::AdaptiveOnline;
  if (s == "gradient-baseline") return ControllerKind::GradientBaseline;
  if (s == "budget-optimal") return ControllerKind::BudgetOptimal;
  invalid(field, "unknown controller '" + s + "'");
}

void parse_inline_network(const Fields& f, ScenarioConfig& sc) {
  sc.adjacency = f.matrix("adjacency");
  sc.lambda = f.vector("lambda");
  sc.h = f.vector("h");
  const auto n = sc.adjacency.rows();
  if (sc.lambda.size() != n) invalid(f.at("lambda"), "needs one entry per agent");
  if (sc.h.size() != n) invalid(f.at("h"), "needs one entry per agent");
  const auto [lo, hi] = f.range("h_range", {sc.h.minCoeff(), sc.h.maxCoeff()});
  sc.h_min = lo;
  sc.h_max = hi;
}

std::string fnv1a64(const std::string& s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string sanitize(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

template <typename Writer>
std::string write_trace(const std::optional<std::filesystem::path>& dir, const std::string& file, Writer&& writer) {
  if (!dir) return {};
  std::error_code ec;
  std::filesystem::create_directories(*dir, ec);
  std::ofstream out(*dir / file, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open " + (*dir / file).string() + " for writing");
  writer(out);
  if (!out) throw Error(Errc::Io, "failed writing " + (*dir / file).string());
  return file;
}

}  // namespace

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::KnownAnalytic: return "known-analytic";
    case ControllerKind::AdaptiveOnline: return "adaptive-online";
    case ControllerKind::GradientBaseline: return "gradient-baseline";
    case ControllerKind::BudgetOptimal: return "budget-optimal";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc) {
  const Fields root(doc, "");
  ExperimentConfig c;
  c.version = static_cast<int>(root.integer("version"));
  if (c.version != kConfigVersion) invalid("version", "unsupported version " + std::to_string(c.version));
  c.name = root.string("name", "");

  const Fields sc = root.child("scenario");
  const std::string source = sc.string("source", "random");
  if (source == "random") {
    c.scenario.source = ScenarioConfig::Source::Random;
    auto& r = c.scenario.random;
    r.n = static_cast<int>(sc.integer("n"));
    r.density = sc.number("density", 0.0);
    r.lambda_range = sc.range("lambda_range", r.lambda_range);
    r.h_range = sc.range("h_range", r.h_range);
    r.seed = sc.seed("seed");
  } else if (source == "inline") {
    c.scenario.source = ScenarioConfig::Source::Inline;
    parse_inline_network(sc, c.scenario);
  } else if (source == "file") {
    c.scenario.source = ScenarioConfig::Source::File;
    c.scenario.path = sc.string("path");
  } else {
    invalid(sc.at("source"), "expected random, inline or file");
  }

  c.target = root.number("target");
  if (!(c.target >= 0.0 && c.target <= 1.0)) invalid("target", "must lie in [0,1]");

  const Fields x0 = root.child("x0");
  const std::string x0_source = x0.string("source", "random");
  if (x0_source == "random") {
    c.x0.random = true;
    c.x0.seed = x0.seed("seed");
    const auto [lo, hi] = x0.range("range", {0.0, 1.0});
    if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) invalid(x0.at("range"), "must satisfy 0 <= lo <= hi <= 1");
    c.x0.lo = lo;
    c.x0.hi = hi;
  } else if (x0_source == "explicit") {
    c.x0.random = false;
    c.x0.values = x0.vector("values");
  } else {
    invalid(x0.at("source"), "expected random or explicit");
  }

  c.controller = parse_controller(root.string("controller", "known-analytic"), "controller");
  c.horizon = static_cast<int>(root.integer("horizon", 100));
  if (c.horizon < 1) invalid("horizon", "must be at least 1");
  c.budget = root.optional_number("budget");
  if (c.budget && !(*c.budget > 0.0)) invalid("budget", "must be positive");
  c.epsilon = root.optional_number("epsilon");
  if (c.epsilon && !(*c.epsilon > 0.0)) invalid("epsilon", "must be positive");

  const Fields an = root.child("analytic");
  c.analytic.a_cap = an.number("a_cap", c.analytic.a_cap);
  c.analytic.a = an.number("a", c.analytic.a);
  c.analytic.b = an.number("b", c.analytic.b);

  const Fields on = root.child("online");
  OnlineConfig& o = c.online;
  o.psi = on.optional_number("psi");
  o.alpha_0 = on.number("alpha_0", o.alpha_0);
  o.gamma = on.number("gamma", o.gamma);
  o.c_delta = on.number("c_delta", o.c_delta);
  o.alpha_min = on.number("alpha_min", o.alpha_min);
  o.a = on.number("a", o.a);
  o.b = on.number("b", o.b);
  o.tol = on.number("tol", o.tol);
  o.max_cycles = static_cast<int>(on.integer("max_cycles", o.max_cycles));
  if (on.has("theta_hat0")) o.theta_hat0 = on.vector("theta_hat0");
  o.theta_err0 = on.optional_number("theta_err0");
  o.nu_theta = on.number("nu_theta", o.nu_theta);
  o.nu_x = on.number("nu_x", o.nu_x);
  o.max_phase_steps = static_cast<int>(on.integer("max_phase_steps", o.max_phase_steps));

  const Fields es = root.child("estimate");
  c.estimate.alpha = es.optional_number("alpha");
  c.estimate.max_steps = static_cast<int>(es.integer("max_steps", c.estimate.max_steps));
  if (c.estimate.alpha && !(*c.estimate.alpha > 0.0)) invalid(es.at("alpha"), "must be positive");
  if (c.estimate.max_steps < 0) invalid(es.at("max_steps"), "must be nonnegative");

  const Fields gr = root.child("gradient");
  GradientControllerConfig& g = c.gradient;
  g.step_size = gr.number("step_size", g.step_size);
  g.interval_tol = gr.number("interval_tol", g.interval_tol);
  g.max_inner = static_cast<int>(gr.integer("max_inner", g.max_inner));
  g.max_backtracks = static_cast<int>(gr.integer("max_backtracks", g.max_backtracks));
  if (gr.has("theta_believed")) g.theta_believed = gr.vector("theta_believed");
  if (!(g.step_size > 0.0)) invalid(gr.at("step_size"), "must be positive");

  const Fields bo = root.child("budget_optimal");
  BudgetOptimalConfig& b = c.budget_optimal;
  b.max_iterations = static_cast<int>(bo.integer("max_iterations", b.max_iterations));
  b.rel_tol = bo.number("rel_tol", b.rel_tol);
  b.step_size = bo.number("step_size", b.step_size);
  b.max_backtracks = static_cast<int>(bo.integer("max_backtracks", b.max_backtracks));

  if (c.controller == ControllerKind::BudgetOptimal && !c.budget) invalid("budget", "required by budget-optimal");
  if (c.epsilon && !c.budget) invalid("budget", "required when epsilon is set");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["version"] = c.version;
  doc["name"] = c.name;
  json sc;
  switch (c.scenario.source) {
    case ScenarioConfig::Source::Random: {
      const auto& r = c.scenario.random;
      sc = {{"source", "random"},
            {"n", r.n},
            {"density", r.density},
            {"lambda_range", {r.lambda_range.first, r.lambda_range.second}},
            {"h_range", {r.h_range.first, r.h_range.second}},
            {"seed", r.seed}};
      break;
    }
    case ScenarioConfig::Source::Inline:
      sc = {{"source", "inline"},
            {"adjacency", mat_json(c.scenario.adjacency)},
            {"lambda", vec_json(c.scenario.lambda)},
            {"h", vec_json(c.scenario.h)},
            {"h_range", {c.scenario.h_min, c.scenario.h_max}}};
      break;
    case ScenarioConfig::Source::File:
      sc = {{"source", "file"}, {"path", c.scenario.path}};
      break;
  }
  doc["scenario"] = sc;
  doc["target"] = c.target;
  if (c.x0.random)
    doc["x0"] = {{"source", "random"}, {"seed", c.x0.seed}, {"range", {c.x0.lo, c.x0.hi}}};
  else
    doc["x0"] = {{"source", "explicit"}, {"values", vec_json(c.x0.values)}};
  doc["controller"] = std::string(to_string(c.controller));
  doc["horizon"] = c.horizon;
  doc["budget"] = opt_json(c.budget);
  doc["epsilon"] = opt_json(c.epsilon);
  doc["analytic"] = {{"a_cap", c.analytic.a_cap}, {"a", c.analytic.a}, {"b", c.analytic.b}};
  const OnlineConfig& o = c.online;
  doc["online"] = {{"psi", opt_json(o.psi)},
                   {"alpha_0", o.alpha_0},
                   {"gamma", o.gamma},
                   {"c_delta", o.c_delta},
                   {"alpha_min", o.alpha_min},
                   {"a", o.a},
                   {"b", o.b},
                   {"tol", o.tol},
                   {"max_cycles", o.max_cycles},
                   {"theta_hat0", opt_vec_json(o.theta_hat0)},
                   {"theta_err0", opt_json(o.theta_err0)},
                   {"nu_theta", o.nu_theta},
                   {"nu_x", o.nu_x},
                   {"max_phase_steps", o.max_phase_steps}};
  doc["estimate"] = {{"alpha", opt_json(c.estimate.alpha)}, {"max_steps", c.estimate.max_steps}};
  const GradientControllerConfig& g = c.gradient;
  doc["gradient"] = {{"step_size", g.step_size},
                     {"interval_tol", g.interval_tol},
                     {"max_inner", g.max_inner},
                     {"max_backtracks", g.max_backtracks},
                     {"theta_believed", opt_vec_json(g.theta_believed)}};
  const BudgetOptimalConfig& b = c.budget_optimal;
  doc["budget_optimal"] = {{"max_iterations", b.max_iterations},
                           {"rel_tol", b.rel_tol},
                           {"step_size", b.step_size},
                           {"max_backtracks", b.max_backtracks}};
  return doc;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a64(to_json(config).dump()); }

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.scenario.random.seed = seed;
  config.x0.seed = seed;
}

Network build_scenario(const ScenarioConfig& sc) {
  switch (sc.source) {
    case ScenarioConfig::Source::Random: {
      auto [graph, params] = random_network(sc.random);
      Network net;
      net.mixing = build_mixing_matrix(graph, params);
      net.graph = std::move(graph);
      net.params = std::move(params);
      return net;
    }
    case ScenarioConfig::Source::Inline: {
      AgentParams params{sc.lambda, sc.h, sc.h_min, sc.h_max};
      return make_network(sc.adjacency, std::move(params));
    }
    case ScenarioConfig::Source::File: {
      std::ifstream in(sc.path);
      if (!in) throw Error(Errc::Io, "cannot open network file " + sc.path);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigInvalid, sc.path + ": " + e.what());
      }
      ScenarioConfig inline_sc;
      parse_inline_network(Fields(doc, "scenario.path"), inline_sc);
      inline_sc.source = ScenarioConfig::Source::Inline;
      return build_scenario(inline_sc);
    }
  }
  throw Error(Errc::ConfigInvalid, "unknown scenario source");
}

Vec build_initial_state(const InitialStateConfig& x0, int n) {
  if (!x0.random) {
    if (x0.values.size() != n) invalid("x0.values", "needs one entry per agent");
    return x0.values;
  }
  Rng rng(x0.seed ^ 0x9e3779b97f4a7c15ULL);
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(x0.lo, x0.hi);
  return x;
}

ExperimentRecord run_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out_dir) {
  ExperimentRecord rec;
  rec.config_hash = config_hash(config);
  rec.run_id = config.name.empty() ? "run-" + rec.config_hash.substr(0, 12) : config.name;
  rec.controller = std::string(to_string(config.controller));

  const Network net = build_scenario(config.scenario);
  const Vec x0 = build_initial_state(config.x0, net.n());
  const double d = config.target;
  const Vec& h = net.params.h;
  const std::string stem = rec.run_id;

  auto finish_trajectory = [&](const Trajectory& traj) {
    rec.final_err_inf = traj.final_error();
    rec.cumulative_cost = traj.cumulative_cost();
    rec.steps = traj.steps();
    rec.trajectory_path =
        write_trace(out_dir, stem + "_trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  };

  switch (config.controller) {
    case ControllerKind::KnownAnalytic: {
      const double S = cost_weight_nonuniform(h);
      std::optional<RateSchedule> schedule;
      if (config.epsilon) {
        const double x0_err = inf_norm((x0.array() - d).matrix());
        FeasibilityProblem p{config.horizon, *config.epsilon, x0_err, *config.budget, S};
        const FeasibilityResult fr = solve_schedule(p);
        if (!fr.feasible) {
          rec.status = "infeasible:" + std::string(to_string(fr.failed));
          finish_trajectory(simulate(net, x0, d, [&](const OpinionState&) { return Vec::Zero(net.n()).eval(); }, 0));
          return rec;
        }
        schedule = fr.schedule;
      } else if (config.budget) {
        schedule = max_progress_schedule(config.horizon, *config.budget, S, config.analytic.a_cap);
      } else {
        schedule = RateSchedule(config.analytic.a, config.analytic.b);
      }
      const Trajectory traj = simulate(net, x0, d, exponential_policy(*schedule, h), config.horizon, config.budget);
      rec.status = traj.budget_exhausted ? "budget_exhausted" : "ok";
      finish_trajectory(traj);
      break;
    }
    case ControllerKind::AdaptiveOnline: {
      OnlineConfig oc = config.online;
      oc.budget = config.budget;
      oc.horizon = config.horizon;
      const OnlineResult res = run_online(net, x0, d, oc);
      rec.status = std::string(to_string(res.status));
      finish_trajectory(res.trajectory);
      rec.cycles_path = write_trace(out_dir, stem + "_cycles.csv", [&](std::ostream& o) { write_cycles_csv(o, res.cycles); });
      rec.estimator_path = write_trace(out_dir, stem + "_estimator.csv",
                                       [&](std::ostream& o) { write_estimator_csv(o, res.estimator_trace, net.n()); });
      break;
    }
    case ControllerKind::GradientBaseline: {
      GradientControllerConfig gc = config.gradient;
      gc.budget = config.budget;
      gc.horizon = config.horizon;
      const GradientBaselineResult res = run_gradient_baseline(net, x0, d, gc);
      rec.status = res.trajectory.budget_exhausted ? "budget_exhausted" : "ok";
      finish_trajectory(res.trajectory);
      break;
    }
    case ControllerKind::BudgetOptimal: {
      const BudgetOptimalResult res =
          run_budget_optimal_baseline(net, x0, d, config.horizon, *config.budget, config.budget_optimal);
      rec.status = res.converged ? "converged" : "nonconvergence";
      finish_trajectory(res.trajectory);
      break;
    }
  }
  return rec;
}

std::vector<ExperimentRecord> sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                   const std::optional<std::filesystem::path>& out_dir) {
  std::vector<ExperimentRecord> records(configs.size());
  auto run_one = [&](std::size_t i) {
    try {
      records[i] = run_experiment(configs[i], out_dir);
    } catch (const std::exception& e) {
      ExperimentRecord& r = records[i];
      r.config_hash = config_hash(configs[i]);
      r.run_id = configs[i].name.empty() ? "run-" + r.config_hash.substr(0, 12) : configs[i].name;
      r.controller = std::string(to_string(configs[i].controller));
      r.status = "error";
      r.error = e.what();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
  if (workers == 1 || configs.size() <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) run_one(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, configs.size()); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) run_one(i);
    });
  }
  pool.clear();
  return records;
}

std::vector<ExperimentConfig> parse_sweep(const json& doc) {
  const Fields root(doc, "");
  std::vector<ExperimentConfig> out;
  if (root.has("runs")) {
    const json& runs = root.raw("runs");
    if (!runs.is_array()) invalid("runs", "expected an array of configs");
    for (const auto& r : runs) out.push_back(parse_config(r));
    return out;
  }
  if (!root.has("base")) invalid("base", "sweep needs either runs or base");
  const ExperimentConfig base = parse_config(root.raw("base"));
  std::vector<std::optional<double>> budgets;
  if (root.has("budgets")) {
    const Vec b = root.vector("budgets");
    for (Eigen::Index i = 0; i < b.size(); ++i) budgets.emplace_back(b(i));
  } else {
    budgets.push_back(base.budget);
  }
  std::vector<ControllerKind> controllers;
  if (root.has("controllers")) {
    const json& cs = root.raw("controllers");
    if (!cs.is_array()) invalid("controllers", "expected an array of names");
    for (const auto& c : cs) {
      if (!c.is_string()) invalid("controllers", "expected controller names");
      controllers.push_back(parse_controller(c.get<std::string>(), "controllers"));
    }
  } else {
    controllers.push_back(base.controller);
  }
  for (ControllerKind kind : controllers) {
    for (const auto& budget : budgets) {
      ExperimentConfig c = base;
      c.controller = kind;
      c.budget = budget;
      const std::string prefix = base.name.empty() ? "sweep" : base.name;
      c.name = prefix + "-" + std::string(to_string(kind)) + (budget ? "-C" + format_double(*budget) : "");
      out.push_back(parse_config(to_json(c)));
    }
  }
  return out;
}

void emit(std::ostream& out, const std::vector<ExperimentRecord>& records, EmitFormat format) {
  if (format == EmitFormat::Csv) {
    CsvWriter csv(out);
    csv.header({"run_id", "config_hash", "controller", "status", "final_err_inf", "cum_cost", "steps", "trajectory_path",
                "cycles_path", "estimator_path", "error"});
    for (const auto& r : records) {
      csv.field(sanitize(r.run_id));
      csv.field(r.config_hash);
      csv.field(r.controller);
      csv.field(r.status);
      csv.field(r.final_err_inf);
      csv.field(r.cumulative_cost);
      csv.field(r.steps);
      csv.field(r.trajectory_path);
      csv.field(r.cycles_path);
      csv.field(r.estimator_path);
      csv.field(sanitize(r.error));
      csv.end_row();
    }
    return;
  }
  for (const auto& r : records) {
    out << "[" << r.run_id << "]\n";
    out << "config_hash = " << r.config_hash << "\n";
    out << "controller = " << r.controller << "\n";
    out << "status = " << r.status << "\n";
    out << "final_err_inf = " << format_double(r.final_err_inf) << "\n";
    out << "cum_cost = " << format_double(r.cumulative_cost) << "\n";
    out << "steps = " << r.steps << "\n";
    if (!r.trajectory_path.empty()) out << "trajectory_path = " << r.trajectory_path << "\n";
    if (!r.cycles_path.empty()) out << "cycles_path = " << r.cycles_path << "\n";
    if (!r.estimator_path.empty()) out << "estimator_path = " << r.estimator_path << "\n";
    if (!r.error.empty()) out << "error = " << r.error << "\n";
    out << "\n";
  }
}

std::vector<ExperimentRecord> parse_records_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  std::vector<ExperimentRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 11) throw Error(Errc::InvalidInput, "record row has " + std::to_string(row.size()) + " fields");
    ExperimentRecord r;
    r.run_id = row[0];
    r.config_hash = row[1];
    r.controller = row[2];
    r.status = row[3];
    r.final_err_inf = std::stod(row[4]);
    r.cumulative_cost = std::stod(row[5]);
    r.steps = std::stoi(row[6]);
    r.trajectory_path = row[7];
    r.cycles_path = row[8];
    r.estimator_path = row[9];
    r.error = row[10];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace opsteer
