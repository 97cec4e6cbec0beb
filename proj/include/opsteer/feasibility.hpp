#pragma once

#include <optional>
#include <string_view>

#include "opsteer/control.hpp"

namespace opsteer {

struct FeasibilityProblem {
  int T = 0;
  double eps = 0.0;
  double x0_err = 0.0;  // ||x(0) - d||_inf
  double C_max = 0.0;
  double S = 0.0;       // cost weight, see cost_weight_*
};

enum class FeasibilityFailure { None, Condition1, Horizon };

std::string_view to_string(FeasibilityFailure f);

/// Both sides of the feasibility inequality evaluated at the chosen (a, b):
/// available >= progress >= required.
struct Certificate {
  double progress = 0.0;   // a (1 - b^T) / (1 - b)
  double required = 0.0;   // log(x0_err / eps)
  double available = 0.0;  // C_max / S
  double error_bound = 0.0;
  double cost = 0.0;
};

struct FeasibilityResult {
  bool feasible = false;
  FeasibilityFailure failed = FeasibilityFailure::None;
  std::optional<RateSchedule> schedule;
  Certificate certificate;
  /// Whether (C_max/S)(1-b)/(1-b^T) <= 1 held at the chosen b, i.e. the
  /// whole admissible a-interval lies below 1.
  bool rate_cap_sufficient = false;
  int bisection_iterations = 0;
};

/// (1 - b^T) / (1 - b); equals T at b = 1.
double geometric_sum(double b, int T);

/// a (1 - b^T) / (1 - b), shared by the error and cost bounds.
double schedule_progress(const RateSchedule& schedule, int T);

/// exp(-a (1 - b^T) / (1 - b)) * x0_err
double error_bound(const RateSchedule& schedule, int T, double x0_err);

/// T -> infinity limit: exp(-a / (1 - b)) * x0_err
double asymptotic_error_bound(const RateSchedule& schedule, double x0_err);

/// a (1 - b^T) / (1 - b) * S
double cost_of_schedule(const RateSchedule& schedule, int T, double S);

/// sum_i 1 / h_i
double cost_weight_nonuniform(const Vec& h);

/// n / h_max
double cost_weight_uniform(int n, double h_max);

/// eps >= x0_err * exp(-C_max / S)
bool check_condition1(const FeasibilityProblem& problem);

/// Finds a minimum-cost exponential schedule meeting eps within T steps and
/// C_max, or reports which condition fails. Throws NumericFailure if the
/// refinement bisection does not converge or the certificate does not hold.
FeasibilityResult solve_schedule(const FeasibilityProblem& problem);

/// Schedule spending as much of C_max as the horizon allows with the largest
/// initial rate a <= a_cap: b solves a (1 - b^T) - (C_max/S)(1 - b) = 0.
RateSchedule max_progress_schedule(int T, double C_max, double S, double a_cap = 0.999);

}  // namespace opsteer
