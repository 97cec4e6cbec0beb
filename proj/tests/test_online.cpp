#include "doctest.h"

#include <sstream>

#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"
#include "opsteer/online.hpp"

using namespace opsteer;

namespace {

Network k2() {
  const Vec h = (Vec(2) << 0.5, 0.25).finished();
  return make_network((Mat(2, 2) << 0, 1, 1, 0).finished(), AgentParams{Vec::Constant(2, 0.5), h, 0.25, 0.5});
}

const Vec kX0 = (Vec(2) << 0.1, 0.3).finished();
constexpr double kTarget = 0.9;

}  // namespace

TEST_CASE("cycle schedule update") {
  const auto [delta, alpha] = update_cycle_schedule(0.2, 0.5, 0.5, 1.0 / 3, 2.0);
  CHECK(delta == doctest::Approx(0.05));
  CHECK(alpha == doctest::Approx(1.0 / 30));
  CHECK(alpha / delta == doctest::Approx(2.0 / 3));
  CHECK(update_cycle_schedule(0.2, 1.0 - 1e-12, 0.5, 1.0, 1.0).first == doctest::Approx(0.1));
}

TEST_CASE("combined error") {
  const Vec x = (Vec(2) << 0.8, 0.9).finished();
  CHECK(combined_error(0.1, x, 1.0, 1.0, 1.0) == doctest::Approx(0.15));
  const Vec y = (Vec(1) << 0.8).finished();
  CHECK(combined_error(0.1, y, 1.0, 1.0, 1.0) == doctest::Approx(0.14));
  CHECK(combined_error(0.1, Vec::Constant(2, 1.0), 1.0, 1.0, 1.0) == doctest::Approx(0.1));
  CHECK(combined_error(0.1, y, 1.0, 2.0, 2.0) == doctest::Approx(0.28));
}

TEST_CASE("two-agent run converges with decreasing combined error") {
  OnlineConfig cfg;
  cfg.theta_hat0 = Vec::Constant(2, 0.4);
  cfg.max_cycles = 50;
  const OnlineResult r = run_online(k2(), kX0, kTarget, cfg);
  CHECK(r.status == OnlineStatus::Converged);
  CHECK(r.trajectory.final_error() <= cfg.tol);
  CHECK(r.cycles.size() <= 51);
  for (std::size_t m = 1; m < r.cycles.size(); ++m) {
    CHECK(r.cycles[m].combined_error <= r.cycles[m - 1].combined_error);
    CHECK(r.cycles[m].delta < r.cycles[m - 1].delta);
  }
  CHECK(r.min_explore_margin > 0.0);
  CHECK(r.psi * r.beta * r.beta == doctest::Approx(1.0));
  CHECK(r.step_phases.size() == r.trajectory.controls.size());
  const Vec err = r.theta_hat - k2().params.h;
  CHECK(err.norm() < (r.theta_hat0 - k2().params.h).norm());
}

TEST_CASE("oracle initialisation leaves the estimate unchanged") {
  OnlineConfig cfg;
  cfg.theta_hat0 = k2().params.h;
  const OnlineResult r = run_online(k2(), kX0, kTarget, cfg);
  CHECK(r.status == OnlineStatus::Converged);
  CHECK((r.theta_hat - k2().params.h).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("exploration disabled when alpha_min >= alpha_0") {
  OnlineConfig cfg;
  cfg.alpha_0 = 0.01;
  cfg.alpha_min = 0.05;
  const OnlineResult r = run_online(k2(), kX0, kTarget, cfg);
  CHECK(r.status == OnlineStatus::Converged);
  for (const auto& c : r.cycles) CHECK(c.explore_steps == 0);
  REQUIRE(r.m_star);
  CHECK(*r.m_star == 0);
  CHECK(r.theta_hat == r.theta_hat0);
}

TEST_CASE("budget and horizon stop the run") {
  OnlineConfig cfg;
  cfg.budget = 2.0;
  OnlineResult r = run_online(k2(), kX0, kTarget, cfg);
  CHECK(r.status == OnlineStatus::BudgetExhausted);
  CHECK(r.trajectory.cumulative_cost() <= 2.0);

  cfg.budget.reset();
  cfg.horizon = 3;
  r = run_online(k2(), kX0, kTarget, cfg);
  CHECK(r.status == OnlineStatus::HorizonReached);
  CHECK(r.trajectory.steps() == 3);
}

TEST_CASE("hyperparameter validation") {
  OnlineConfig cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(run_online(k2(), kX0, kTarget, cfg), Error);
  cfg = {};
  cfg.c_delta = 0.75;
  CHECK_THROWS_AS(run_online(k2(), kX0, kTarget, cfg), Error);
  cfg = {};
  cfg.psi = 1e6;
  CHECK_THROWS_AS(run_online(k2(), kX0, kTarget, cfg), Error);
}

TEST_CASE("online runs are deterministic") {
  OnlineConfig cfg;
  const OnlineResult a = run_online(k2(), kX0, kTarget, cfg);
  const OnlineResult b = run_online(k2(), kX0, kTarget, cfg);
  std::ostringstream sa, sb;
  write_cycles_csv(sa, a.cycles);
  write_cycles_csv(sb, b.cycles);
  CHECK(sa.str() == sb.str());
  const auto rows = parse_csv(sa.str());
  CHECK(rows[0] == std::vector<std::string>{"m", "phase_steps_explore", "phase_steps_exploit", "delta_m", "alpha_m", "R",
                                            "err_inf", "combined_error", "cum_cost"});
  CHECK(rows.size() == a.cycles.size() + 1);
}

TEST_CASE("identification under persistent excitation") {
  IdentificationConfig cfg;
  cfg.theta_hat0 = Vec::Constant(2, 0.4);
  const IdentificationResult r = run_identification(k2(), kX0, kTarget, cfg);
  REQUIRE_FALSE(r.trace.empty());
  const double k = kappa(r.psi, r.beta, r.alpha);
  double prev = r.R0;
  for (const auto& s : r.trace) {
    CHECK(s.pe_ok);
    CHECK(s.R <= (1.0 - k) * prev + 1e-15);
    CHECK(s.recursion_residual < 1e-12);
    prev = s.R;
  }
  for (const auto& st : r.trajectory.states)
    if (st.t < r.trajectory.steps()) CHECK((st.x.array() - kTarget).abs().minCoeff() > r.delta);
}

TEST_CASE("identification steps on a random network certify contraction") {
  RandomNetworkSpec spec;
  spec.n = 5;
  spec.density = 0.3;
  spec.seed = 5;
  auto [g, p] = random_network(spec);
  const Network net = make_network(g.adjacency, p);
  const IdentificationResult r = run_identification(net, Vec::Constant(5, 0.1), 0.9, {});
  REQUIRE_FALSE(r.trace.empty());
  for (const auto& s : r.trace) {
    CHECK(s.pe_ok);
    CHECK(s.kappa == doctest::Approx(kappa(r.psi, r.beta, r.alpha)).epsilon(1e-9));
  }
}
