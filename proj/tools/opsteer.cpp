#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"
#include "opsteer/feasibility.hpp"
#include "opsteer/harness.hpp"
#include "opsteer/linalg.hpp"

namespace fs = std::filesystem;
using namespace opsteer;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "override every seed in the config");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) override_seed(cfg, *c.seed);
  return cfg;
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_summary(const fs::path& dir, const std::vector<ExperimentRecord>& records) {
  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  if (!csv) throw Error(Errc::Io, "cannot write " + (dir / "summary.csv").string());
  emit(csv, records, EmitFormat::Csv);
  emit(std::cout, records, EmitFormat::Text);
}

int run_single(const Common& c, std::optional<ControllerKind> force) {
  ExperimentConfig cfg = load(c);
  if (force) cfg.controller = *force;
  const fs::path dir = prepare_out(c);
  write_summary(dir, {run_experiment(cfg, dir)});
  return 0;
}

int run_feasibility(const Common& c) {
  const ExperimentConfig cfg = load(c);
  if (!cfg.epsilon) throw Error(Errc::ConfigInvalid, "field 'epsilon': required by feasibility");
  if (!cfg.budget) throw Error(Errc::ConfigInvalid, "field 'budget': required by feasibility");
  const Network net = build_scenario(cfg.scenario);
  const Vec x0 = build_initial_state(cfg.x0, net.n());
  const FeasibilityProblem p{cfg.horizon, *cfg.epsilon, inf_norm((x0.array() - cfg.target).matrix()), *cfg.budget,
                             cost_weight_nonuniform(net.params.h)};
  const FeasibilityResult r = solve_schedule(p);

  std::ostringstream text;
  text << "feasible = " << (r.feasible ? "true" : "false") << "\n";
  text << "failure = " << to_string(r.failed) << "\n";
  text << "T = " << p.T << "\n";
  text << "epsilon = " << format_double(p.eps) << "\n";
  text << "x0_err = " << format_double(p.x0_err) << "\n";
  text << "C_max = " << format_double(p.C_max) << "\n";
  text << "S = " << format_double(p.S) << "\n";
  if (r.schedule) {
    text << "a = " << format_double(r.schedule->a()) << "\n";
    text << "b = " << format_double(r.schedule->b()) << "\n";
  }
  text << "progress = " << format_double(r.certificate.progress) << "\n";
  text << "required_progress = " << format_double(r.certificate.required) << "\n";
  text << "available_progress = " << format_double(r.certificate.available) << "\n";
  text << "error_bound = " << format_double(r.certificate.error_bound) << "\n";
  text << "cost = " << format_double(r.certificate.cost) << "\n";
  text << "rate_cap_sufficient = " << (r.rate_cap_sufficient ? "true" : "false") << "\n";
  text << "bisection_iterations = " << r.bisection_iterations << "\n";

  const fs::path dir = prepare_out(c);
  std::ofstream out(dir / "feasibility.txt", std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + (dir / "feasibility.txt").string());
  out << text.str();
  std::cout << text.str();
  return 0;
}

int run_estimate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const Network net = build_scenario(cfg.scenario);
  const Vec x0 = build_initial_state(cfg.x0, net.n());
  IdentificationConfig ic;
  ic.alpha = cfg.estimate.alpha;
  ic.max_steps = cfg.estimate.max_steps;
  ic.psi = cfg.online.psi;
  ic.theta_hat0 = cfg.online.theta_hat0;
  const IdentificationResult res = run_identification(net, x0, cfg.target, ic);

  const fs::path dir = prepare_out(c);
  std::ofstream traj(dir / "trajectory.csv", std::ios::binary);
  std::ofstream est(dir / "estimator.csv", std::ios::binary);
  if (!traj || !est) throw Error(Errc::Io, "cannot write traces in " + dir.string());
  write_trajectory_csv(traj, res.trajectory);
  write_estimator_csv(est, res.trace, net.n());

  std::cout << "steps = " << res.trajectory.steps() << "\n";
  std::cout << "alpha = " << format_double(res.alpha) << "\n";
  std::cout << "beta = " << format_double(res.beta) << "\n";
  std::cout << "psi = " << format_double(res.psi) << "\n";
  std::cout << "delta = " << format_double(res.delta) << "\n";
  std::cout << "R0 = " << format_double(res.R0) << "\n";
  const Vec theta = res.trace.empty() ? res.theta_hat0 : res.trace.back().theta_hat;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    std::cout << "theta_hat_" << i + 1 << " = " << format_double(theta(i)) << "\n";
  return 0;
}

int run_baseline(const Common& c, const std::string& method) {
  ExperimentConfig cfg = load(c);
  if (method == "gradient")
    cfg.controller = ControllerKind::GradientBaseline;
  else if (method == "budget-optimal")
    cfg.controller = ControllerKind::BudgetOptimal;
  else if (cfg.controller != ControllerKind::BudgetOptimal)
    cfg.controller = ControllerKind::GradientBaseline;
  if (cfg.controller == ControllerKind::BudgetOptimal && !cfg.budget)
    throw Error(Errc::ConfigInvalid, "field 'budget': required by budget-optimal");
  const fs::path dir = prepare_out(c);
  write_summary(dir, {run_experiment(cfg, dir)});
  return 0;
}

int run_sweep(const Common& c, int jobs) {
  std::ifstream in(c.config);
  if (!in) throw Error(Errc::Io, "cannot open config " + c.config);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, c.config + ": " + e.what());
  }
  std::vector<ExperimentConfig> configs = parse_sweep(doc);
  if (c.seed)
    for (auto& cfg : configs) override_seed(cfg, *c.seed);
  const fs::path dir = prepare_out(c);
  write_summary(dir, sweep(configs, jobs, dir));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted opinion steering: simulation, feasibility, estimation and online control"};
  app.require_subcommand(1);
  Common common;
  int jobs = 1;
  std::string method;

  auto* simulate = app.add_subcommand("simulate", "simulate the known-parameter analytic controller");
  auto* feasibility = app.add_subcommand("feasibility", "solve the accuracy-vs-budget schedule problem");
  auto* estimate = app.add_subcommand("estimate", "identify susceptibilities under persistent excitation");
  auto* online = app.add_subcommand("online", "run the adaptive explore/exploit controller");
  auto* baseline = app.add_subcommand("baseline", "run a gradient baseline controller");
  auto* sweep_cmd = app.add_subcommand("sweep", "run a list or grid of experiments");
  for (auto* cmd : {simulate, feasibility, estimate, online, baseline, sweep_cmd}) add_common(cmd, common);
  baseline->add_option("--method", method, "gradient | budget-optimal")->check(CLI::IsMember({"gradient", "budget-optimal"}));
  sweep_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return run_single(common, ControllerKind::KnownAnalytic);
    if (*feasibility) return run_feasibility(common);
    if (*estimate) return run_estimate(common);
    if (*online) return run_single(common, ControllerKind::AdaptiveOnline);
    if (*baseline) return run_baseline(common, method);
    if (*sweep_cmd) return run_sweep(common, jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numeric(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
