#pragma once

#include "opsteer/dynamics.hpp"

namespace opsteer {

/// r(t) = a b^t with 0 < a, b < 1.
class RateSchedule {
 public:
  RateSchedule(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double rate(int t) const;

 private:
  double a_;
  double b_;
};

/// Conservative per-agent upper bound on susceptibility.
struct ThetaCap {
  Vec theta_max;

  /// min_j 1 / theta_max_j
  double u_max() const;
};

ThetaCap make_theta_cap(Vec theta_max);

/// u_i = r(t) / h_i.
Vec exponential_control(const RateSchedule& schedule, int t, const Vec& h);

/// Scalar control r / h_max shared by all agents.
double uniform_control(double r, double h_max);

/// u_j = min(alpha / (lambda_V |x_j - d|), 1 / theta_max_j).
/// Throws AtTarget when some |x_j - d| < 1e-12.
Vec pe_control(const Vec& x, double d, double alpha, double lambda_V, const ThetaCap& cap);

/// u_j = r_t / theta_max_j.
Vec exploitation_control(double r_t, const ThetaCap& cap);

Policy exponential_policy(RateSchedule schedule, Vec h);

}  // namespace opsteer
