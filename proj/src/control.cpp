#include "opsteer/control.hpp"

#include <cmath>

#include "opsteer/error.hpp"

namespace opsteer {

RateSchedule::RateSchedule(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0 && a < 1.0)) throw Error(Errc::InvalidRange, "schedule a must lie in (0,1)");
  if (!(b > 0.0 && b < 1.0)) throw Error(Errc::InvalidRange, "schedule b must lie in (0,1)");
}

double RateSchedule::rate(int t) const { return a_ * std::pow(b_, t); }

double ThetaCap::u_max() const { return 1.0 / theta_max.maxCoeff(); }

ThetaCap make_theta_cap(Vec theta_max) {
  if (theta_max.size() == 0 || !(theta_max.array() > 0.0).all())
    throw Error(Errc::InvalidRange, "theta_max must be positive");
  return {std::move(theta_max)};
}

Vec exponential_control(const RateSchedule& schedule, int t, const Vec& h) {
  return (schedule.rate(t) / h.array()).matrix();
}

double uniform_control(double r, double h_max) {
  if (!(r > 0.0 && r < 1.0)) throw Error(Errc::InvalidRange, "rate must lie in (0,1)");
  if (!(h_max > 0.0)) throw Error(Errc::InvalidRange, "h_max must be positive");
  return r / h_max;
}

Vec pe_control(const Vec& x, double d, double alpha, double lambda_V, const ThetaCap& cap) {
  if (!(alpha >= 0.0)) throw Error(Errc::InvalidRange, "alpha must be nonnegative");
  if (!(lambda_V > 0.0)) throw Error(Errc::InvalidRange, "lambda_V must be positive");
  if (x.size() != cap.theta_max.size()) throw Error(Errc::InvalidInput, "cap has wrong dimension");
  Vec u(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double gap = std::abs(x(j) - d);
    if (gap < 1e-12) throw Error(Errc::AtTarget, "agent " + std::to_string(j) + " is at the target");
    u(j) = std::min(alpha / (lambda_V * gap), 1.0 / cap.theta_max(j));
  }
  return u;
}

Vec exploitation_control(double r_t, const ThetaCap& cap) {
  if (!(r_t > 0.0 && r_t < 1.0)) throw Error(Errc::InvalidRange, "rate must lie in (0,1)");
  return (r_t / cap.theta_max.array()).matrix();
}

Policy exponential_policy(RateSchedule schedule, Vec h) {
  return [schedule, h = std::move(h)](const OpinionState& prev) { return exponential_control(schedule, prev.t, h); };
}

}  // namespace opsteer
