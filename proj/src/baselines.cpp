#include "opsteer/baselines.hpp"

#include <cmath>

#include "opsteer/error.hpp"
#include "opsteer/feasibility.hpp"

namespace opsteer {

namespace {

Vec next_state(const Vec& x, const Vec& u, const Mat& V, const Vec& h, double d) {
  const Vec w = (h.array() * u.array()).matrix();
  return V * ((1.0 - w.array()) * x.array() + w.array() * d).matrix();
}

}  // namespace

double one_step_loss(const Vec& x, const Vec& u, const Mat& V, const Vec& h, double d) {
  return 0.5 * (next_state(x, u, V, h, d).array() - d).matrix().squaredNorm();
}

Vec one_step_loss_gradient(const Vec& x, const Vec& u, const Mat& V, const Vec& h, double d) {
  const Vec residual = (next_state(x, u, V, h, d).array() - d).matrix();
  const Vec sens = (h.array() * (d - x.array())).matrix();
  return (sens.array() * (V.transpose() * residual).array()).matrix();
}

InnerSolve minimize_one_step(const Vec& x, Vec u, const Mat& V, const Vec& h, double d, const Vec& upper,
                             const GradientControllerConfig& config) {
  InnerSolve out;
  u = u.cwiseMax(0.0).cwiseMin(upper);
  double loss = one_step_loss(x, u, V, h, d);
  out.losses.push_back(loss);
  for (int it = 0; it < config.max_inner; ++it) {
    const Vec g = one_step_loss_gradient(x, u, V, h, d);
    if (g.norm() == 0.0) break;
    double step = config.step_size;
    bool accepted = false;
    for (int k = 0; k <= config.max_backtracks; ++k, step *= 0.5) {
      Vec cand = (u - step * g).cwiseMax(0.0).cwiseMin(upper);
      const double cand_loss = one_step_loss(x, cand, V, h, d);
      if (cand_loss <= loss) {
        accepted = cand != u;
        u = std::move(cand);
        loss = cand_loss;
        break;
      }
    }
    if (!accepted) break;
    out.losses.push_back(loss);
  }
  out.u = std::move(u);
  return out;
}

GradientBaselineResult run_gradient_baseline(const Network& net, const Vec& x0, double d,
                                             const GradientControllerConfig& config) {
  if (!(config.step_size > 0.0)) throw Error(Errc::InvalidRange, "step size must be positive");
  if (config.horizon < 0) throw Error(Errc::InvalidRange, "horizon must be nonnegative");
  const Vec h = config.theta_believed.value_or(net.params.h);
  if (h.size() != net.n() || !(h.array() > 0.0).all()) throw Error(Errc::InvalidInput, "believed theta must be positive");
  const Vec upper = (1.0 / h.array()).matrix();
  const Mat& V = net.mixing.V;

  GradientBaselineResult result;
  Plant plant(net, x0, d, config.budget);
  Vec u = Vec::Zero(net.n());
  while (plant.state().t < config.horizon && !plant.budget_exhausted()) {
    InnerSolve solve = minimize_one_step(plant.state().x, u, V, h, d, upper, config);
    for (std::size_t k = 1; k < solve.losses.size(); ++k)
      if (solve.losses[k] > solve.losses[k - 1]) result.descent_ok = false;
    u = std::move(solve.u);
    ++result.intervals;
    double prev_err = plant.error();
    while (plant.state().t < config.horizon) {
      if (!plant.apply(u)) break;
      const double improvement = prev_err - plant.error();
      prev_err = plant.error();
      if (improvement < config.interval_tol) break;
    }
  }
  plant.coast(config.horizon);
  result.trajectory = plant.release();
  return result;
}

Vec project_capped_simplex(const Vec& v, const Vec& upper, double total) {
  auto clipped = [&](double shift) { return (v.array() - shift).max(0.0).min(upper.array()).matrix().eval(); };
  Vec p = clipped(0.0);
  if (p.sum() <= total) return p;
  // sum(clip(v - s)) is nonincreasing in s; find s with sum = total.
  double lo = 0.0, hi = v.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (clipped(mid).sum() > total ? lo : hi) = mid;
  }
  return clipped(hi);
}

SequenceLoss sequence_loss(const Network& net, const Vec& x0, double d, const std::vector<Vec>& controls,
                           bool with_gradient) {
  const Mat& V = net.mixing.V;
  const Vec& h = net.params.h;
  std::vector<Vec> xs{x0};
  xs.reserve(controls.size() + 1);
  for (const Vec& u : controls) xs.push_back(next_state(xs.back(), u, V, h, d));
  SequenceLoss out;
  Vec adj = (xs.back().array() - d).matrix();
  out.loss = 0.5 * adj.squaredNorm();
  if (!with_gradient) return out;
  out.grad.resize(controls.size());
  for (std::size_t k = controls.size(); k-- > 0;) {
    const Vec vt_adj = V.transpose() * adj;
    out.grad[k] = (h.array() * (d - xs[k].array()) * vt_adj.array()).matrix();
    adj = ((1.0 - h.array() * controls[k].array()) * vt_adj.array()).matrix();
  }
  return out;
}

BudgetOptimalResult run_budget_optimal_baseline(const Network& net, const Vec& x0, double d, int T, double C_max,
                                                const BudgetOptimalConfig& config) {
  if (T < 1) throw Error(Errc::InvalidRange, "horizon must be at least 1");
  if (!(C_max > 0.0)) throw Error(Errc::InvalidRange, "budget must be positive");
  const int n = net.n();
  const Vec& h = net.params.h;
  const Vec upper = (1.0 / h.array()).matrix();

  const RateSchedule seed = max_progress_schedule(T, C_max, cost_weight_nonuniform(h), config.a_cap);
  std::vector<Vec> u(T);
  for (int t = 0; t < T; ++t) u[t] = exponential_control(seed, t, h);

  auto project = [&](const std::vector<Vec>& seq) {
    Vec flat(static_cast<Eigen::Index>(T) * n), cap(flat.size());
    for (int t = 0; t < T; ++t) {
      flat.segment(static_cast<Eigen::Index>(t) * n, n) = seq[t];
      cap.segment(static_cast<Eigen::Index>(t) * n, n) = upper;
    }
    const Vec p = project_capped_simplex(flat, cap, C_max);
    std::vector<Vec> out(T);
    for (int t = 0; t < T; ++t) out[t] = p.segment(static_cast<Eigen::Index>(t) * n, n);
    return out;
  };

  u = project(u);
  BudgetOptimalResult result;
  SequenceLoss cur = sequence_loss(net, x0, d, u);
  result.seed_loss = cur.loss;
  double step = config.step_size;
  for (int it = 0; it < config.max_iterations; ++it) {
    result.iterations = it + 1;
    bool accepted = false;
    double trial = step;
    for (int k = 0; k <= config.max_backtracks; ++k, trial *= 0.5) {
      std::vector<Vec> cand(T);
      for (int t = 0; t < T; ++t) cand[t] = u[t] - trial * cur.grad[t];
      cand = project(cand);
      const double cand_loss = sequence_loss(net, x0, d, cand, false).loss;
      if (cand_loss <= cur.loss) {
        const double improvement = cur.loss - cand_loss;
        u = std::move(cand);
        cur = sequence_loss(net, x0, d, u);
        accepted = true;
        step = std::min(2.0 * trial, config.step_size * 1e6);
        if (improvement <= config.rel_tol * std::max(cur.loss, 1e-300)) result.converged = true;
        break;
      }
    }
    if (!accepted || result.converged) {
      result.converged = true;
      break;
    }
  }

  result.loss = cur.loss;
  result.controls = u;
  std::size_t k = 0;
  result.trajectory = simulate(net, x0, d, [&](const OpinionState&) { return u[k++]; }, T, C_max + 1e-9);
  return result;
}

}  // namespace opsteer
