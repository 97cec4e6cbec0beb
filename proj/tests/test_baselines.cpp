#include "doctest.h"

#include <cfloat>
#include <cmath>

#include "opsteer/baselines.hpp"
#include "opsteer/control.hpp"
#include "opsteer/error.hpp"
#include "opsteer/feasibility.hpp"
#include "opsteer/rng.hpp"

using namespace opsteer;

namespace {

Network default_scenario() {
  RandomNetworkSpec spec;
  spec.n = 5;
  spec.density = 0.3;
  spec.seed = 7;
  auto [g, p] = random_network(spec);
  return make_network(g.adjacency, p);
}

Vec default_x0() { return (Vec(5) << 0.1, 0.35, 0.2, 0.45, 0.05).finished(); }

constexpr double kTarget = 0.9;

}  // namespace

TEST_CASE("one-step loss gradient at the target is zero") {
  const Network net = default_scenario();
  const Vec x = Vec::Constant(5, kTarget);
  CHECK(one_step_loss_gradient(x, Vec::Ones(5), net.mixing.V, net.params.h, kTarget).norm() == 0.0);
}

TEST_CASE("scalar one-step loss by hand") {
  const Mat V = Mat::Identity(1, 1);
  const Vec h = Vec::Constant(1, 0.5), x = Vec::Constant(1, 0.5);
  for (double u : {0.0, 1.0, 2.0}) {
    const double next = 0.5 + 0.25 * u;
    CHECK(one_step_loss(x, Vec::Constant(1, u), V, h, 1.0) == doctest::Approx(0.5 * (next - 1.0) * (next - 1.0)));
    CHECK(one_step_loss_gradient(x, Vec::Constant(1, u), V, h, 1.0)(0) == doctest::Approx((next - 1.0) * 0.25));
  }
}

TEST_CASE("one-step gradient matches central differences") {
  Rng rng(3);
  const Network net = default_scenario();
  for (int k = 0; k < 20; ++k) {
    Vec x(5), u(5);
    for (int i = 0; i < 5; ++i) {
      x(i) = rng.uniform();
      u(i) = rng.uniform(0.05, 0.95) / net.params.h(i);
    }
    const double d = rng.uniform();
    const Vec g = one_step_loss_gradient(x, u, net.mixing.V, net.params.h, d);
    for (int i = 0; i < 5; ++i) {
      Vec up = u, dn = u;
      up(i) += 1e-6;
      dn(i) -= 1e-6;
      const double fd = (one_step_loss(x, up, net.mixing.V, net.params.h, d) - one_step_loss(x, dn, net.mixing.V, net.params.h, d)) / 2e-6;
      CHECK(std::abs(g(i) - fd) <= 1e-6 * std::max(g.norm(), 1e-12));
    }
  }
}

TEST_CASE("inner solve is monotone and respects the box") {
  const Network net = default_scenario();
  const Vec upper = (1.0 / net.params.h.array()).matrix();
  GradientControllerConfig cfg;
  cfg.step_size = 100.0;
  const InnerSolve s = minimize_one_step(default_x0(), Vec::Zero(5), net.mixing.V, net.params.h, kTarget, upper, cfg);
  for (std::size_t k = 1; k < s.losses.size(); ++k) CHECK(s.losses[k] <= s.losses[k - 1]);
  CHECK((s.u.array() >= 0.0).all());
  CHECK((s.u.array() <= upper.array()).all());
  CHECK(((s.u - upper).cwiseAbs().array() < 1e-15).any());
}

TEST_CASE("gradient baseline with zero budget is pure consensus") {
  const Network net = default_scenario();
  GradientControllerConfig cfg;
  cfg.budget = 0.0;
  cfg.horizon = 10;
  const GradientBaselineResult r = run_gradient_baseline(net, default_x0(), kTarget, cfg);
  CHECK(r.trajectory.cumulative_cost() == 0.0);
  CHECK(r.trajectory.steps() == 10);
  Vec x = default_x0();
  for (int t = 0; t < 10; ++t) x = net.mixing.V * x;
  CHECK((r.trajectory.final_state().x - x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic control beats the gradient baseline at C_max = 15") {
  const Network net = default_scenario();
  const double C = 15.0;
  GradientControllerConfig cfg;
  cfg.budget = C;
  const GradientBaselineResult grad = run_gradient_baseline(net, default_x0(), kTarget, cfg);
  const RateSchedule s = max_progress_schedule(cfg.horizon, C, cost_weight_nonuniform(net.params.h));
  const Trajectory known = simulate(net, default_x0(), kTarget, exponential_policy(s, net.params.h), cfg.horizon, C);
  CHECK(grad.trajectory.cumulative_cost() <= C);
  CHECK(known.cumulative_cost() <= C * (1.0 + 1e-12));
  CHECK(known.final_error() < grad.trajectory.final_error());
  CHECK(grad.descent_ok);
}

TEST_CASE("capped simplex projection") {
  const Vec v = (Vec(3) << 0.5, 2.0, -1.0).finished();
  const Vec cap = Vec::Constant(3, 1.5);
  const Vec inside = project_capped_simplex(v, cap, 10.0);
  CHECK(inside.isApprox((Vec(3) << 0.5, 1.5, 0.0).finished()));
  const Vec p = project_capped_simplex(v, cap, 1.0);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((p.array() >= 0.0).all());
  CHECK((p.array() <= cap.array()).all());
  CHECK(p(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sequence loss gradient matches central differences") {
  const Network net = default_scenario();
  std::vector<Vec> u(4);
  for (int t = 0; t < 4; ++t) u[t] = (0.3 / (t + 1.0)) * (1.0 / net.params.h.array()).matrix();
  const SequenceLoss L = sequence_loss(net, default_x0(), kTarget, u);
  for (int t = 0; t < 4; ++t) {
    for (int i = 0; i < 5; ++i) {
      auto up = u, dn = u;
      up[t](i) += 1e-6;
      dn[t](i) -= 1e-6;
      const double fd = (sequence_loss(net, default_x0(), kTarget, up, false).loss -
                         sequence_loss(net, default_x0(), kTarget, dn, false).loss) / 2e-6;
      CHECK(L.grad[t](i) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("budget-optimal baseline improves on its analytic seed") {
  const Network net = default_scenario();
  double prev = 1e300;
  for (double C : {10.0, 20.0, 30.0, 40.0, 50.0}) {
    const BudgetOptimalResult r = run_budget_optimal_baseline(net, default_x0(), kTarget, 50, C);
    CHECK(r.loss <= r.seed_loss);
    CHECK(r.trajectory.steps() == 50);
    CHECK(r.trajectory.cumulative_cost() <= C + 1e-9);
    CHECK(r.trajectory.final_error() <= prev * (1.0 + 1e-9) + 8 * DBL_EPSILON);
    prev = r.trajectory.final_error();
  }
}

TEST_CASE("huge budget reaches the target almost immediately") {
  const Network net = default_scenario();
  const BudgetOptimalResult r = run_budget_optimal_baseline(net, default_x0(), kTarget, 5, 1e6);
  CHECK(r.trajectory.final_error() < 1e-6);
}
