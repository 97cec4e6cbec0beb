#include "opsteer/online.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"

namespace opsteer {

namespace {

void validate(const OnlineConfig& c) {
  if (!(c.alpha_0 > 0.0)) throw Error(Errc::InvalidRange, "alpha_0 must be positive");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw Error(Errc::InvalidRange, "gamma must lie in (0,1)");
  if (!(c.c_delta > 0.0 && c.c_delta <= 0.5)) throw Error(Errc::InvalidRange, "c_delta must lie in (0, 1/2]");
  if (!(c.alpha_min > 0.0 && c.alpha_min < 1.0)) throw Error(Errc::InvalidRange, "alpha_min must lie in (0,1)");
  if (!(c.tol >= 0.0)) throw Error(Errc::InvalidRange, "tol must be nonnegative");
  if (c.max_cycles < 0) throw Error(Errc::InvalidRange, "max_cycles must be nonnegative");
  if (!(c.nu_theta > 0.0 && c.nu_x > 0.0)) throw Error(Errc::InvalidRange, "weights must be positive");
  if (c.max_phase_steps < 1) throw Error(Errc::InvalidRange, "max_phase_steps must be positive");
  RateSchedule(c.a, c.b);
}

bool all_outside(const Vec& x, double d, double radius, bool strict) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double gap = std::abs(x(j) - d);
    if (strict ? !(gap > radius) : !(gap >= radius)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(OnlineStatus s) {
  switch (s) {
    case OnlineStatus::Converged: return "converged";
    case OnlineStatus::MaxCycles: return "max_cycles";
    case OnlineStatus::BudgetExhausted: return "budget_exhausted";
    case OnlineStatus::HorizonReached: return "horizon_reached";
  }
  return "unknown";
}

std::pair<double, double> update_cycle_schedule(double delta_m, double gamma, double c_delta, double lambda_V,
                                                double u_max_end) {
  const double delta_next = c_delta * (gamma * delta_m);
  return {delta_next, lambda_V * u_max_end * delta_next};
}

double combined_error(double R, const Vec& x, double d, double nu_theta, double nu_x) {
  return nu_theta * R + nu_x * (x.array() - d).matrix().squaredNorm();
}

OnlineResult run_online(const Network& net, const Vec& x0, double d, const OnlineConfig& config) {
  validate(config);
  const int n = net.n();
  const double h_lo = net.params.h_min;
  const double h_hi = net.params.h_max;
  const MixingMatrix& mixing = net.mixing;
  const double lambda_V = mixing.lambda_V;

  OnlineResult result;
  result.lambda_V = lambda_V;
  result.beta = regressor_norm_bound(mixing, config.alpha_0 / lambda_V);
  result.psi = config.psi.value_or(1.0 / (result.beta * result.beta));
  if (!(result.psi < 2.0 / (result.beta * result.beta))) throw Error(Errc::GainTooLarge, "psi >= 2/beta^2");

  Vec theta_hat0 = config.theta_hat0.value_or(Vec::Constant(n, 0.5 * (h_lo + h_hi)));
  if (theta_hat0.size() != n) throw Error(Errc::InvalidInput, "theta_hat0 has wrong dimension");
  const double err0 = config.theta_err0.value_or(
      (theta_hat0.array() - h_lo).abs().max((h_hi - theta_hat0.array()).abs()).matrix().norm());
  result.theta_hat0 = theta_hat0;

  EstimatorConfig est_cfg;
  est_cfg.psi = result.psi;
  est_cfg.beta = result.beta;
  est_cfg.theta_hat0 = theta_hat0;
  est_cfg.clamp_hi = h_hi;
  est_cfg.theta_err0_bound = err0;
  est_cfg.theta_true = net.params.h;
  Estimator estimator(est_cfg);

  auto refresh_cap = [&] {
    Vec theta_max = (estimator.theta_hat().array() + estimator.theta_err_bound()).min(h_hi).matrix();
    return make_theta_cap(std::move(theta_max));
  };

  Plant plant(net, x0, d, config.budget);
  const RateSchedule exploit_rate(config.a, config.b);
  ThetaCap cap = refresh_cap();
  double alpha = config.alpha_0;
  double delta = std::min(pe_margin(alpha, lambda_V, cap.u_max()), 1.0);
  result.min_explore_margin = std::numeric_limits<double>::infinity();
  bool budget_hit = false;
  bool horizon_hit = false;

  auto apply = [&](const Vec& u, Phase phase) {
    if (config.horizon && plant.state().t >= *config.horizon) {
      horizon_hit = true;
      return false;
    }
    if (!plant.apply(u)) {
      budget_hit = true;
      return false;
    }
    result.step_phases.push_back(phase);
    return true;
  };

  for (int m = 0;; ++m) {
    const Vec& x_start = plant.state().x;
    CycleRecord rec;
    rec.m = m;
    rec.t_start = plant.state().t;
    rec.delta = delta;
    rec.alpha = alpha;
    rec.R = *estimator.lyapunov();
    rec.err_inf = plant.error();
    rec.err_sq = (x_start.array() - d).matrix().squaredNorm();
    rec.combined_error = combined_error(rec.R, x_start, d, config.nu_theta, config.nu_x);
    rec.cum_cost = plant.cumulative_cost();
    rec.theta_err_bound = estimator.theta_err_bound();
    result.cycles.push_back(rec);
    CycleRecord& cur = result.cycles.back();

    if (plant.error() <= config.tol) {
      result.status = OnlineStatus::Converged;
      break;
    }
    if (m >= config.max_cycles) {
      result.status = OnlineStatus::MaxCycles;
      break;
    }

    const bool exploring = alpha > config.alpha_min;
    if (!exploring && !result.m_star) result.m_star = m;

    while (exploring && all_outside(plant.state().x, d, delta, true)) {
      if (cur.explore_steps >= config.max_phase_steps) throw Error(Errc::StalledCycle, "exploration phase did not leave the margin band");
      const Vec x_prev = plant.state().x;
      const double margin = (x_prev.array() - d).abs().minCoeff() - delta;
      result.min_explore_margin = std::min(result.min_explore_margin, margin);
      const Vec u = pe_control(x_prev, d, alpha, lambda_V, cap);
      if (!apply(u, Phase::Explore)) break;
      estimator.update(build_regressor(x_prev, u, d, mixing), plant.state().x);
      ++cur.explore_steps;
    }
    if (budget_hit || horizon_hit) break;

    cap = refresh_cap();

    for (int tau = 0; all_outside(plant.state().x, d, config.gamma * delta, false); ++tau) {
      const double r = exploit_rate.rate(tau);
      if (tau >= config.max_phase_steps || r < 1e-12)
        throw Error(Errc::StalledCycle, "exploitation rate vanished before the inner band was reached");
      if (!apply(exploitation_control(r, cap), Phase::Exploit)) break;
      ++cur.exploit_steps;
    }
    if (budget_hit || horizon_hit) break;

    auto [delta_next, alpha_next] = update_cycle_schedule(delta, config.gamma, config.c_delta, lambda_V, cap.u_max());
    delta = delta_next;
    alpha = std::min(alpha_next, config.alpha_0);
  }

  if (budget_hit) result.status = OnlineStatus::BudgetExhausted;
  if (horizon_hit) result.status = OnlineStatus::HorizonReached;
  if (!result.m_star && !(alpha > config.alpha_min)) result.m_star = static_cast<int>(result.cycles.size()) - 1;
  if (result.m_star) result.R_min = result.cycles[*result.m_star].R;
  result.theta_hat = estimator.theta_hat();
  result.estimator_trace = estimator.history();
  result.trajectory = plant.release();
  return result;
}

IdentificationResult run_identification(const Network& net, const Vec& x0, double d, const IdentificationConfig& config) {
  if (config.max_steps < 0) throw Error(Errc::InvalidRange, "max_steps must be nonnegative");
  const int n = net.n();
  const double h_lo = net.params.h_min;
  const double h_hi = net.params.h_max;
  const MixingMatrix& mixing = net.mixing;
  const ThetaCap cap = make_theta_cap(Vec::Constant(n, h_hi));

  IdentificationResult result;
  result.alpha = config.alpha.value_or(0.5 * (x0.array() - d).abs().minCoeff() * mixing.lambda_V * cap.u_max());
  if (!(result.alpha > 0.0)) throw Error(Errc::InvalidRange, "alpha must be positive");
  const double alpha = result.alpha;
  result.beta = regressor_norm_bound(mixing, alpha / mixing.lambda_V);
  result.psi = config.psi.value_or(1.0 / (result.beta * result.beta));
  result.theta_hat0 = config.theta_hat0.value_or(Vec::Constant(n, 0.5 * (h_lo + h_hi)));
  if (result.theta_hat0.size() != n) throw Error(Errc::InvalidInput, "theta_hat0 has wrong dimension");

  result.delta = pe_margin(alpha, mixing.lambda_V, cap.u_max());

  EstimatorConfig est_cfg;
  est_cfg.psi = result.psi;
  est_cfg.beta = result.beta;
  est_cfg.theta_hat0 = result.theta_hat0;
  est_cfg.clamp_hi = h_hi;
  est_cfg.theta_err0_bound = (result.theta_hat0.array() - h_lo).abs().max((h_hi - result.theta_hat0.array()).abs()).matrix().norm();
  est_cfg.theta_true = net.params.h;
  Estimator estimator(est_cfg);
  result.R0 = *estimator.lyapunov();

  Plant plant(net, x0, d);
  for (int k = 0; k < config.max_steps && all_outside(plant.state().x, d, result.delta, true); ++k) {
    const Vec x_prev = plant.state().x;
    const Vec u = pe_control(x_prev, d, alpha, mixing.lambda_V, cap);
    plant.apply(u);
    estimator.update(build_regressor(x_prev, u, d, mixing), plant.state().x, alpha);
  }
  result.trace = estimator.history();
  result.trajectory = plant.release();
  return result;
}

void write_cycles_csv(std::ostream& out, const std::vector<CycleRecord>& cycles) {
  CsvWriter csv(out);
  csv.header({"m", "phase_steps_explore", "phase_steps_exploit", "delta_m", "alpha_m", "R", "err_inf", "combined_error",
              "cum_cost"});
  for (const auto& c : cycles) {
    csv.field(c.m);
    csv.field(c.explore_steps);
    csv.field(c.exploit_steps);
    csv.field(c.delta);
    csv.field(c.alpha);
    csv.field(c.R);
    csv.field(c.err_inf);
    csv.field(c.combined_error);
    csv.field(c.cum_cost);
    csv.end_row();
  }
}

}  // namespace opsteer
