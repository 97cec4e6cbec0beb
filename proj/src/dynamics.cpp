#include "opsteer/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"

namespace opsteer {

namespace {

void check_unit_box(const Vec& x, const char* what) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) >= -kBoxTol && x(i) <= 1.0 + kBoxTol))
      throw Error(Errc::StateOutOfBox, std::string(what) + " component " + std::to_string(i) + " = " + format_double(x(i)));
}

}  // namespace

void check_admissible(const Vec& u, const Vec& h) {
  if (u.size() != h.size()) throw Error(Errc::InvalidInput, "control has wrong dimension");
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double hu = h(i) * u(i);
    if (!(u(i) >= 0.0) || !(hu <= 1.0 + kBoxTol))
      throw Error(Errc::InadmissibleControl, "h_" + std::to_string(i) + " u_" + std::to_string(i) + " = " + format_double(hu));
  }
}

OpinionState step(const OpinionState& state, const Vec& u, const Network& net, double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error(Errc::InvalidRange, "target outside [0,1]");
  if (state.x.size() != net.n()) throw Error(Errc::InvalidInput, "state has wrong dimension");
  check_unit_box(state.x, "previous state");
  const Vec& h = net.params.h;
  check_admissible(u, h);
  const Vec w = (h.array() * u.array()).min(1.0).matrix();
  const Vec blend = ((1.0 - w.array()) * state.x.array() + w.array() * d).matrix();
  Vec next = net.mixing.V * blend;
  check_unit_box(next, "next state");
  next = next.cwiseMax(0.0).cwiseMin(1.0);
  return {std::move(next), state.t + 1};
}

double contraction_factor(const Vec& u, const AgentParams& params) {
  check_admissible(u, params.h);
  const double eta = (params.h.array() * u.array()).minCoeff();
  if (!(eta > 0.0)) throw Error(Errc::ZeroControl, "some h_i u_i is zero");
  return std::min(eta, 1.0);
}

Plant::Plant(const Network& net, Vec x0, double d, std::optional<double> budget)
    : net_(net), d_(d), budget_(budget) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error(Errc::InvalidRange, "target outside [0,1]");
  if (x0.size() != net.n()) throw Error(Errc::InvalidInput, "x0 has wrong dimension");
  check_unit_box(x0, "initial state");
  if (budget && !(*budget >= 0.0)) throw Error(Errc::InvalidRange, "budget must be nonnegative");
  const double err = inf_norm((x0.array() - d).matrix());
  traj_.states.push_back({std::move(x0), 0});
  traj_.err_inf.push_back(err);
}

bool Plant::apply(const Vec& u) {
  if (traj_.budget_exhausted) return false;
  check_admissible(u, net_.params.h);
  const double cost = u.sum();
  const double cum = traj_.cumulative_cost() + cost;
  if (budget_ && cum > *budget_ * (1.0 + kBudgetRelTol)) {
    traj_.budget_exhausted = true;
    return false;
  }
  OpinionState next = step(traj_.states.back(), u, net_, d_);
  traj_.err_inf.push_back(inf_norm((next.x.array() - d_).matrix()));
  traj_.states.push_back(std::move(next));
  traj_.controls.push_back(u);
  traj_.step_costs.push_back(cost);
  traj_.cum_costs.push_back(cum);
  return true;
}

void Plant::coast(int T) {
  const Vec zero = Vec::Zero(net_.n());
  while (traj_.states.back().t < T) {
    OpinionState next = step(traj_.states.back(), zero, net_, d_);
    traj_.err_inf.push_back(inf_norm((next.x.array() - d_).matrix()));
    traj_.states.push_back(std::move(next));
    traj_.controls.push_back(zero);
    traj_.step_costs.push_back(0.0);
    traj_.cum_costs.push_back(traj_.cumulative_cost());
  }
}

Trajectory simulate(const Network& net, const Vec& x0, double d, const Policy& policy, int T,
                    std::optional<double> budget) {
  if (T < 0) throw Error(Errc::InvalidRange, "horizon must be nonnegative");
  Plant plant(net, x0, d, budget);
  for (int k = 0; k < T; ++k) {
    if (!plant.apply(policy(plant.state()))) break;
  }
  return plant.release();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto n = traj.states.front().x.size();
  CsvWriter csv(out);
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= n; ++i) header.push_back("u_" + std::to_string(i));
  header.insert(header.end(), {"step_cost", "cum_cost", "err_inf"});
  csv.header(header);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    csv.field(s.t);
    for (Eigen::Index i = 0; i < n; ++i) csv.field(s.x(i));
    for (Eigen::Index i = 0; i < n; ++i) csv.field(k == 0 ? 0.0 : traj.controls[k - 1](i));
    csv.field(k == 0 ? 0.0 : traj.step_costs[k - 1]);
    csv.field(k == 0 ? 0.0 : traj.cum_costs[k - 1]);
    csv.field(traj.err_inf[k]);
    csv.end_row();
  }
}

}  // namespace opsteer
