#pragma once

#include <optional>
#include <vector>

#include "opsteer/dynamics.hpp"

namespace opsteer {

/// 1/2 ||x_next - d||^2 for x_next = V[(1 - h o u) o x + h o u d].
double one_step_loss(const Vec& x, const Vec& u, const Mat& V, const Vec& h, double d);

/// Gradient of one_step_loss with respect to u:
/// (V diag(h o (d - x)))^T (x_next - d).
Vec one_step_loss_gradient(const Vec& x, const Vec& u, const Mat& V, const Vec& h, double d);

struct GradientControllerConfig {
  double step_size = 0.5;       // initial step of each backtracking search
  double interval_tol = 1e-3;   // hold U until err_inf improves by less than this
  int max_inner = 10;           // projected-gradient iterations per interval
  int max_backtracks = 30;
  int horizon = 100;
  std::optional<double> budget;
  std::optional<Vec> theta_believed;  // defaults to the true h
};

struct InnerSolve {
  Vec u;
  std::vector<double> losses;  // loss before the first and after every accepted iteration
};

/// Projected gradient descent on the one-step loss over the box [0, upper].
InnerSolve minimize_one_step(const Vec& x, Vec u, const Mat& V, const Vec& h, double d, const Vec& upper,
                             const GradientControllerConfig& config);

struct GradientBaselineResult {
  Trajectory trajectory;
  int intervals = 0;
  bool descent_ok = true;  // every inner loop was monotone
};

/// Interval-and-hold controller: choose U by projected gradient on the
/// one-step loss, hold it until the error stops improving, repeat until the
/// horizon ends or the budget is spent, then let the network evolve
/// uncontrolled to the horizon. The budget is not used to pick U.
GradientBaselineResult run_gradient_baseline(const Network& net, const Vec& x0, double d,
                                             const GradientControllerConfig& config);

/// Euclidean projection onto {0 <= u <= upper, sum(u) <= total}.
Vec project_capped_simplex(const Vec& v, const Vec& upper, double total);

/// 1/2 ||x(T) - d||^2 of an open-loop sequence, with its adjoint gradient.
struct SequenceLoss {
  double loss = 0.0;
  std::vector<Vec> grad;
};

SequenceLoss sequence_loss(const Network& net, const Vec& x0, double d, const std::vector<Vec>& controls,
                           bool with_gradient = true);

struct BudgetOptimalConfig {
  int max_iterations = 400;
  double rel_tol = 1e-10;
  double step_size = 1.0;
  int max_backtracks = 30;
  double a_cap = 0.999;  // seed schedule, see max_progress_schedule
};

struct BudgetOptimalResult {
  Trajectory trajectory;
  std::vector<Vec> controls;
  double loss = 0.0;
  double seed_loss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Open-loop projected gradient over the whole sequence {u(t)}_{t<T},
/// minimizing ||x(T) - d||^2 under sum_t ||u(t)||_1 <= C_max and
/// 0 <= u_i(t) <= 1/h_i, seeded with the analytic max-progress schedule.
/// `converged` is false when max_iterations ran out (best iterate returned).
BudgetOptimalResult run_budget_optimal_baseline(const Network& net, const Vec& x0, double d, int T, double C_max,
                                                const BudgetOptimalConfig& config = {});

}  // namespace opsteer
