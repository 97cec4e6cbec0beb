#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "opsteer/baselines.hpp"
#include "opsteer/control.hpp"
#include "opsteer/dynamics.hpp"
#include "opsteer/error.hpp"
#include "opsteer/estimator.hpp"
#include "opsteer/feasibility.hpp"
#include "opsteer/harness.hpp"
#include "opsteer/network.hpp"
#include "opsteer/online.hpp"
#include "opsteer/rng.hpp"

using namespace opsteer;
namespace fs = std::filesystem;

namespace {

/// Rounding floor of one mixing step on values in [0,1].
constexpr double kRoundoff = 8.0 * std::numeric_limits<double>::epsilon();

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Scenario {
  Network net;
  Vec x0;
  double d = 0.0;
};

Network random_net(Rng& rng, int n) {
  RandomNetworkSpec spec;
  spec.n = n;
  spec.density = rng.uniform(0.0, 0.6);
  spec.seed = rng.next();
  auto [graph, params] = random_network(spec);
  Network net;
  net.mixing = build_mixing_matrix(graph, params);
  net.graph = std::move(graph);
  net.params = std::move(params);
  return net;
}

Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

/// Opinions start below the target so every agent approaches from one side.
Scenario one_sided(Rng& rng, int n) {
  Scenario s{random_net(rng, n), Vec(), 0.0};
  s.x0 = random_vec(rng, n, 0.0, 0.5);
  s.d = rng.uniform(0.7, 1.0);
  return s;
}

int random_n(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1)); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome invariance() {
  Rng rng(101);
  long long violations = 0, states = 0;
  for (int run = 0; run < 1000; ++run) {
    const int n = random_n(rng, 2, 12);
    const Network net = random_net(rng, n);
    const Vec x0 = random_vec(rng, n, 0.0, 1.0);
    const double d = rng.uniform(0.0, 1.0);
    Plant plant(net, x0, d);
    for (int t = 0; t < 50; ++t) {
      const Vec& x = plant.state().x;
      Vec hu = random_vec(rng, n, 0.0, 1.0);
      if (t % 7 == 0) hu(static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(n))) = 1.0;
      const Vec u = (hu.array() / net.params.h.array()).matrix();
      const Vec raw = net.mixing.V * ((1.0 - hu.array()) * x.array() + hu.array() * d).matrix();
      try {
        plant.apply(u);
      } catch (const Error&) {
        ++violations;
        break;
      }
      ++states;
      if ((raw.array() < -kBoxTol).any() || (raw.array() > 1.0 + kBoxTol).any()) ++violations;
      if ((plant.state().x.array() < 0.0).any() || (plant.state().x.array() > 1.0).any()) ++violations;
    }
  }
  return {violations == 0, std::to_string(states) + " states, " + std::to_string(violations) + " violations"};
}

Outcome exponential_stability() {
  Rng rng(202);
  long long failures = 0, checks = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int run = 0; run < 200; ++run) {
    const int n = random_n(rng, 2, 12);
    const Network net = random_net(rng, n);
    const double d = rng.uniform(0.0, 1.0);
    Plant plant(net, random_vec(rng, n, 0.0, 1.0), d);
    for (int t = 0; t < 60; ++t) {
      const Vec hu = random_vec(rng, n, 0.01, 1.0);
      const Vec u = (hu.array() / net.params.h.array()).matrix();
      const double eta = contraction_factor(u, net.params);
      const double before = plant.error();
      plant.apply(u);
      const double slack = plant.error() - (1.0 - eta) * before;
      worst = std::max(worst, slack);
      ++checks;
      if (slack > kRoundoff) ++failures;
    }
  }
  return {failures == 0, std::to_string(checks) + " steps, max excess " + fmt("%.3g", worst)};
}

Outcome schedule_exactness() {
  Rng rng(303);
  int failures = 0;
  double worst_cost = 0.0, worst_err = -1.0;
  for (int run = 0; run < 200; ++run) {
    const int n = random_n(rng, 2, 12);
    const Network net = random_net(rng, n);
    const Vec x0 = random_vec(rng, n, 0.0, 1.0);
    const double d = rng.uniform(0.0, 1.0);
    const RateSchedule sched(rng.uniform(0.05, 0.95), rng.uniform(0.5, 0.999));
    const int T = random_n(rng, 1, 300);
    const Trajectory traj = simulate(net, x0, d, exponential_policy(sched, net.params.h), T);
    const double S = (1.0 / net.params.h.array()).sum();
    const double b = sched.b();
    const double predicted = sched.a() * (1.0 - std::pow(b, T)) / (1.0 - b) * S;
    const double rel = std::abs(traj.cumulative_cost() - predicted) / predicted;
    const double x0_err = (x0.array() - d).abs().maxCoeff();
    const double bound = std::exp(-sched.a() * (1.0 - std::pow(b, T)) / (1.0 - b)) * x0_err;
    worst_cost = std::max(worst_cost, rel);
    worst_err = std::max(worst_err, traj.final_error() - bound);
    if (!(rel <= 1e-9) || traj.final_error() > bound + kRoundoff) ++failures;
  }
  return {failures == 0, "max cost rel err " + fmt("%.3g", worst_cost) + ", max err - bound " + fmt("%.3g", worst_err)};
}

Outcome feasibility_soundness() {
  Rng rng(404);
  int feasible = 0, cond1 = 0, horizon = 0, failures = 0;
  for (int run = 0; run < 300; ++run) {
    const int n = random_n(rng, 2, 10);
    const Network net = random_net(rng, n);
    const Vec x0 = random_vec(rng, n, 0.0, 1.0);
    const double d = rng.uniform(0.0, 1.0);
    const double x0_err = (x0.array() - d).abs().maxCoeff();
    if (x0_err < 1e-3) continue;
    const double S = cost_weight_nonuniform(net.params.h);
    const FeasibilityProblem p{random_n(rng, 1, 200), std::pow(10.0, rng.uniform(-6.0, -0.5)), x0_err,
                               rng.uniform(1.0, 80.0), S};
    const FeasibilityResult r = solve_schedule(p);
    if (r.feasible) {
      ++feasible;
      const Trajectory traj = simulate(net, x0, d, exponential_policy(*r.schedule, net.params.h), p.T, p.C_max);
      if (traj.budget_exhausted || traj.steps() != p.T || traj.final_error() > p.eps ||
          traj.cumulative_cost() > p.C_max * (1.0 + kBudgetRelTol))
        ++failures;
    } else if (r.failed == FeasibilityFailure::Condition1) {
      ++cond1;
      if (!(p.eps < p.x0_err * std::exp(-p.C_max / p.S))) ++failures;
    } else {
      ++horizon;
    }
  }
  const bool pass = failures == 0 && feasible > 0 && cond1 > 0;
  return {pass, std::to_string(feasible) + " feasible, " + std::to_string(cond1) + " condition-1, " +
                    std::to_string(horizon) + " horizon, " + std::to_string(failures) + " failures"};
}

Outcome lemma1_contraction() {
  Rng rng(505);
  int failures = 0, steps = 0, runs = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int run = 0; run < 100; ++run) {
    const Scenario s = one_sided(rng, random_n(rng, 2, 10));
    IdentificationConfig ic;
    ic.max_steps = 40;
    const IdentificationResult id = run_identification(s.net, s.x0, s.d, ic);
    if (id.trace.empty()) continue;
    ++runs;
    const double psi = id.psi;
    if (std::abs(psi * id.beta * id.beta - 1.0) > 1e-12) ++failures;
    const double k = kappa(psi, id.beta, id.alpha);
    const Vec& theta = s.net.params.h;
    const double R0 = lyapunov_value(id.theta_hat0 - theta, psi);
    double R_prev = R0;
    for (const auto& st : id.trace) {
      if (!st.pe_ok) {
        ++failures;
        break;
      }
      const double R = lyapunov_value(st.theta_hat - theta, psi);
      const double bound = std::sqrt(2.0 * psi * R0) * std::pow(1.0 - k, 0.5 * st.t);
      const double err = (st.theta_hat - theta).norm();
      worst = std::max(worst, err - bound);
      if (R > (1.0 - k) * R_prev + 1e-9 || err > bound + 1e-9) ++failures;
      R_prev = R;
      ++steps;
    }
  }
  return {failures == 0 && runs >= 90,
          std::to_string(runs) + " runs, " + std::to_string(steps) + " PE steps, max err - bound " + fmt("%.3g", worst)};
}

Outcome recursion_exactness() {
  Rng rng(606);
  double worst = 0.0;
  int steps = 0;
  for (int run = 0; run < 100; ++run) {
    const Scenario s = one_sided(rng, random_n(rng, 2, 10));
    const Network& net = s.net;
    const Vec& theta = net.params.h;
    const int n = net.n();
    const double alpha = 0.5 * (s.x0.array() - s.d).abs().minCoeff() * net.mixing.lambda_V / net.params.h_max;
    const double beta = regressor_norm_bound(net.mixing, alpha / net.mixing.lambda_V);
    EstimatorConfig cfg;
    cfg.psi = 1.0 / (beta * beta);
    cfg.beta = beta;
    cfg.theta_hat0 = random_vec(rng, n, net.params.h_min, net.params.h_max);
    cfg.clamp_lo = -std::numeric_limits<double>::infinity();
    cfg.clamp_hi = std::numeric_limits<double>::infinity();
    cfg.theta_err0_bound = 1.0;
    cfg.theta_true = theta;
    Estimator est(cfg);
    const ThetaCap cap = make_theta_cap(Vec::Constant(n, net.params.h_max));
    Plant plant(net, s.x0, s.d);
    for (int t = 0; t < 30; ++t) {
      const Vec x_prev = plant.state().x;
      if ((x_prev.array() - s.d).abs().minCoeff() <= 1e-6) break;
      const Vec u = pe_control(x_prev, s.d, alpha, net.mixing.lambda_V, cap);
      plant.apply(u);
      const Regressor reg = build_regressor(x_prev, u, s.d, net.mixing);
      const Vec err_prev = est.theta_hat() - theta;
      const Vec predicted = (Mat::Identity(n, n) - cfg.psi * reg.F.transpose() * reg.F) * err_prev;
      est.update(reg, plant.state().x);
      worst = std::max(worst, (est.theta_hat() - theta - predicted).cwiseAbs().maxCoeff());
      ++steps;
    }
  }
  return {worst <= 1e-12 && steps > 0, std::to_string(steps) + " steps, max residual " + fmt("%.3g", worst)};
}

Outcome online_convergence() {
  Rng rng(707);
  const int sizes[] = {2, 5, 10};
  int failures = 0, converged = 0;
  std::string why;
  for (int run = 0; run < 20; ++run) {
    const Scenario s = one_sided(rng, sizes[run % 3]);
    OnlineConfig cfg;
    cfg.tol = 1e-4;
    cfg.max_cycles = 200;
    const OnlineResult r = run_online(s.net, s.x0, s.d, cfg);
    bool ok = r.status == OnlineStatus::Converged && r.trajectory.final_error() < 1e-4 &&
              static_cast<int>(r.cycles.size()) <= 201 && r.min_explore_margin > 0.0;
    if (r.status == OnlineStatus::Converged) ++converged;
    for (std::size_t m = 1; m < r.cycles.size(); ++m)
      if (!(r.cycles[m].delta < r.cycles[m - 1].delta)) ok = false;
    if (r.m_star)
      for (std::size_t m = static_cast<std::size_t>(*r.m_star) + 1; m < r.cycles.size(); ++m)
        if (r.cycles[m].combined_error > r.cycles[m - 1].combined_error) ok = false;
    if (!ok) {
      ++failures;
      if (why.empty()) why = " (first failure: run " + std::to_string(run) + ", status " + std::string(to_string(r.status)) + ")";
    }
  }
  return {failures == 0, std::to_string(converged) + "/20 converged" + why};
}

Outcome cost_of_learning() {
  Rng rng(808);
  int not_worse = 0, strictly = 0;
  std::string detail;
  for (int run = 0; run < 10; ++run) {
    const Scenario s = one_sided(rng, random_n(rng, 3, 8));
    const int T = 100;
    const double C = 15.0;
    OnlineConfig oc;
    oc.tol = 0.0;
    oc.budget = C;
    oc.horizon = T;
    const OnlineResult adaptive = run_online(s.net, s.x0, s.d, oc);
    const double S = cost_weight_nonuniform(s.net.params.h);
    const Trajectory known =
        simulate(s.net, s.x0, s.d, exponential_policy(max_progress_schedule(T, C, S), s.net.params.h), T, C);
    const double ek = known.final_error(), ea = adaptive.trajectory.final_error();
    if (ek <= ea) ++not_worse;
    if (ek < ea) ++strictly;
  }
  return {not_worse == 10 && strictly >= 8,
          std::to_string(not_worse) + "/10 not worse, " + std::to_string(strictly) + "/10 strictly better"};
}

Outcome baseline_ordering() {
  Rng rng(909);
  int failures = 0, points = 0;
  std::string why;
  for (int run = 0; run < 5; ++run) {
    const Scenario s = one_sided(rng, random_n(rng, 3, 8));
    const int T = 100;
    const double S = cost_weight_nonuniform(s.net.params.h);
    double prev_known = std::numeric_limits<double>::infinity(), prev_grad = prev_known;
    for (double C = 10.0; C <= 50.0; C += 5.0) {
      const Trajectory known =
          simulate(s.net, s.x0, s.d, exponential_policy(max_progress_schedule(T, C, S), s.net.params.h), T, C);
      GradientControllerConfig gc;
      gc.horizon = T;
      gc.budget = C;
      const GradientBaselineResult grad = run_gradient_baseline(s.net, s.x0, s.d, gc);
      const double ek = known.final_error(), eg = grad.trajectory.final_error();
      ++points;
      bool ok = ek <= eg && ek <= prev_known && eg <= prev_grad;
      if (!ok) {
        ++failures;
        if (why.empty()) why = " (first failure: scenario " + std::to_string(run) + ", C=" + fmt("%g", C) + ")";
      }
      prev_known = ek;
      prev_grad = eg;
    }
  }
  return {failures == 0, std::to_string(points) + " sweep points, " + std::to_string(failures) + " failures" + why};
}

Outcome gradient_check() {
  Rng rng(1010);
  double worst = 0.0;
  for (int run = 0; run < 100; ++run) {
    const int n = random_n(rng, 2, 12);
    const Network net = random_net(rng, n);
    const Vec x = random_vec(rng, n, 0.0, 1.0);
    const double d = rng.uniform(0.0, 1.0);
    const Vec& h = net.params.h;
    const Vec u = (random_vec(rng, n, 0.05, 0.95).array() / h.array()).matrix();
    const Vec g = one_step_loss_gradient(x, u, net.mixing.V, h, d);
    Vec fd(n);
    for (int i = 0; i < n; ++i) {
      const double step = 1e-5 * std::max(1.0, std::abs(u(i)));
      Vec up = u, dn = u;
      up(i) += step;
      dn(i) -= step;
      fd(i) = (one_step_loss(x, up, net.mixing.V, h, d) - one_step_loss(x, dn, net.mixing.V, h, d)) / (2.0 * step);
    }
    const double rel = (g - fd).norm() / std::max(g.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.3g", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a)) files.push_back(e.path().filename());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (files.size() != count_b) return false;
  for (const auto& f : files)
    if (!fs::exists(b / f) || slurp(a / f) != slurp(b / f)) return false;
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() /
                        ("opsteer_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::vector<ExperimentConfig> configs;
  const char* controllers[] = {"known-analytic", "adaptive-online", "gradient-baseline", "budget-optimal"};
  for (int k = 0; k < 4; ++k) {
    for (int seed = 1; seed <= 3; ++seed) {
      nlohmann::json doc = {{"version", 1},
                            {"name", std::string(controllers[k]) + "-" + std::to_string(seed)},
                            {"scenario", {{"source", "random"}, {"n", 5}, {"density", 0.3}, {"seed", seed}}},
                            {"target", 0.9},
                            {"x0", {{"source", "random"}, {"seed", seed}, {"range", {0.0, 0.5}}}},
                            {"controller", controllers[k]},
                            {"horizon", 60},
                            {"budget", 20.0},
                            {"budget_optimal", {{"max_iterations", 50}}}};
      configs.push_back(parse_config(doc));
    }
  }
  auto run = [&](const std::string& tag, int jobs) {
    const fs::path dir = root / tag;
    fs::create_directories(dir);
    const auto records = sweep(configs, jobs, dir);
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    emit(out, records, EmitFormat::Csv);
    return dir;
  };
  const fs::path a = run("serial_a", 1), b = run("serial_b", 1), c = run("parallel", 8);
  const bool ok = same_tree(a, b) && same_tree(a, c);
  bool no_errors = true;
  for (const auto& r : parse_records_csv(slurp(a / "summary.csv"))) no_errors = no_errors && r.error.empty();
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(a)) ++files;
  fs::remove_all(root);
  return {ok && no_errors, std::to_string(files) + " files compared across serial, repeat and 8-thread runs"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"1 invariance of [0,1]^n", invariance},
      {"2 per-step exponential stability", exponential_stability},
      {"3 schedule cost and error bound exactness", schedule_exactness},
      {"4 feasibility soundness", feasibility_soundness},
      {"5 Lyapunov contraction under PE", lemma1_contraction},
      {"6 estimator error recursion", recursion_exactness},
      {"7 online convergence and monotone combined error", online_convergence},
      {"8 cost of learning ordering", cost_of_learning},
      {"9 analytic vs gradient baseline ordering", baseline_ordering},
      {"10 one-step loss gradient", gradient_check},
      {"11 determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
