#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "opsteer/control.hpp"
#include "opsteer/estimator.hpp"

namespace opsteer {

struct OnlineConfig {
  std::optional<double> psi;  // defaults to 1 / beta^2
  double alpha_0 = 0.1;
  double gamma = 0.5;
  double c_delta = 0.5;
  double alpha_min = 1e-3;
  double a = 0.5;  // exploitation rate r(tau) = a b^tau, tau local to the phase
  double b = 0.95;
  double tol = 1e-4;
  int max_cycles = 200;
  std::optional<double> budget;
  std::optional<int> horizon;       // optional cap on total plant steps
  std::optional<Vec> theta_hat0;    // defaults to the midpoint of [h_min, h_max]
  std::optional<double> theta_err0; // a-priori bound on ||theta_err(0)||_2
  double nu_theta = 1.0;
  double nu_x = 1.0;
  int max_phase_steps = 100000;
};

enum class Phase { Explore, Exploit };
enum class OnlineStatus { Converged, MaxCycles, BudgetExhausted, HorizonReached };

std::string_view to_string(OnlineStatus s);

/// Snapshot taken at the start t_m of cycle m, plus the phase lengths that followed.
struct CycleRecord {
  int m = 0;
  int t_start = 0;
  int explore_steps = 0;
  int exploit_steps = 0;
  double delta = 0.0;
  double alpha = 0.0;
  double R = 0.0;
  double err_inf = 0.0;
  double err_sq = 0.0;  // ||x - d||_2^2
  double combined_error = 0.0;
  double cum_cost = 0.0;
  double theta_err_bound = 0.0;
};

struct OnlineResult {
  OnlineStatus status = OnlineStatus::MaxCycles;
  std::vector<CycleRecord> cycles;
  Trajectory trajectory;
  std::vector<Phase> step_phases;  // aligned with trajectory.controls
  std::vector<EstimatorStep> estimator_trace;
  Vec theta_hat0;
  Vec theta_hat;
  std::optional<int> m_star;
  double R_min = 0.0;
  double lambda_V = 0.0;
  double beta = 0.0;
  double psi = 0.0;
  /// Smallest min_j |x_j - d| - delta_m over all exploration steps (+inf if none).
  double min_explore_margin = 0.0;
};

/// delta' = c_delta gamma delta_m, alpha' = lambda_V u_max delta'.
std::pair<double, double> update_cycle_schedule(double delta_m, double gamma, double c_delta, double lambda_V,
                                                double u_max_end);

/// nu_theta R + nu_x ||x - d||_2^2
double combined_error(double R, const Vec& x, double d, double nu_theta, double nu_x);

/// Two-phase exploration/exploitation controller. The plant uses the true
/// susceptibility; the controller only sees V, the state, and [h_min, h_max].
/// The truth is read only to report R.
OnlineResult run_online(const Network& net, const Vec& x0, double d, const OnlineConfig& config);

struct IdentificationConfig {
  std::optional<double> alpha;  // defaults to the level whose margin is half the smallest initial gap
  int max_steps = 50;
  std::optional<double> psi;        // defaults to 1 / beta^2
  std::optional<Vec> theta_hat0;    // defaults to the midpoint of [h_min, h_max]
};

struct IdentificationResult {
  double alpha = 0.0;
  Trajectory trajectory;
  std::vector<EstimatorStep> trace;
  Vec theta_hat0;
  double beta = 0.0;
  double psi = 0.0;
  double delta = 0.0;  // margin kept during excitation
  double R0 = 0.0;
};

/// Standalone excitation run: PE control capped at 1/h_max until the
/// margin band is reached or max_steps elapse, updating the estimator each step.
IdentificationResult run_identification(const Network& net, const Vec& x0, double d, const IdentificationConfig& config);

/// Columns: m, phase_steps_explore, phase_steps_exploit, delta_m, alpha_m, R,
/// err_inf, combined_error, cum_cost.
void write_cycles_csv(std::ostream& out, const std::vector<CycleRecord>& cycles);

}  // namespace opsteer
