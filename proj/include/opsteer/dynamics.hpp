#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "opsteer/network.hpp"

namespace opsteer {

struct OpinionState {
  Vec x;
  int t = 0;
};

/// Slack allowed on the [0,1] box and on h_i u_i in [0,1] before a value is
/// treated as a genuine violation; anything inside the slack is clamped.
inline constexpr double kBoxTol = 1e-12;

/// Relative slack on the budget comparison so a schedule whose closed-form
/// cost equals C_max is not cut short by summation rounding.
inline constexpr double kBudgetRelTol = 1e-12;

/// One step of x(t) = V[(I - HU) x(t-1) + HU d 1]. Throws InadmissibleControl
/// if some h_i u_i leaves [0,1] and StateOutOfBox if the result leaves [0,1]^n.
OpinionState step(const OpinionState& state, const Vec& u, const Network& net, double d);

/// min_i h_i u_i. Throws ZeroControl when it is zero.
double contraction_factor(const Vec& u, const AgentParams& params);

/// Throws InadmissibleControl unless u >= 0 and h_i u_i in [0,1] (within kBoxTol).
void check_admissible(const Vec& u, const Vec& h);

/// A policy sees the previous state (its `t` is the index of the step about
/// to be taken minus one) and returns the control applied at the next step.
using Policy = std::function<Vec(const OpinionState& prev)>;

struct Trajectory {
  std::vector<OpinionState> states;  // states[k] = x(k)
  std::vector<Vec> controls;         // controls[k] produced states[k+1]
  std::vector<double> step_costs;    // aligned with controls
  std::vector<double> cum_costs;     // aligned with controls
  std::vector<double> err_inf;       // aligned with states
  bool budget_exhausted = false;

  int steps() const { return static_cast<int>(controls.size()); }
  double cumulative_cost() const { return cum_costs.empty() ? 0.0 : cum_costs.back(); }
  const OpinionState& final_state() const { return states.back(); }
  double final_error() const { return err_inf.back(); }
};

/// Drives the true plant and records the trajectory. Used directly by
/// simulate() and step-by-step by the online and baseline controllers.
class Plant {
 public:
  Plant(const Network& net, Vec x0, double d, std::optional<double> budget = std::nullopt);

  /// Applies u unless that would push cumulative cost past the budget, in
  /// which case nothing is applied, budget_exhausted() becomes true and
  /// false is returned.
  bool apply(const Vec& u);

  /// Lets the network evolve uncontrolled (u = 0) until time T.
  void coast(int T);

  const OpinionState& state() const { return traj_.states.back(); }
  double target() const { return d_; }
  double error() const { return traj_.err_inf.back(); }
  double cumulative_cost() const { return traj_.cumulative_cost(); }
  bool budget_exhausted() const { return traj_.budget_exhausted; }
  const Trajectory& trajectory() const { return traj_; }
  Trajectory release() { return std::move(traj_); }

  /// Ground-truth susceptibility, for diagnostics only.
  const Vec& true_h() const { return net_.params.h; }

 private:
  const Network& net_;
  double d_;
  std::optional<double> budget_;
  Trajectory traj_;
};

/// Runs up to T steps; stops at the first control the budget rejects.
Trajectory simulate(const Network& net, const Vec& x0, double d, const Policy& policy, int T,
                    std::optional<double> budget = std::nullopt);

/// Columns: t, x_1..x_n, u_1..u_n, step_cost, cum_cost, err_inf. The t = 0
/// row carries zero control and cost.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace opsteer
