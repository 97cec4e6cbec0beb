#include "opsteer/feasibility.hpp"

#include <array>
#include <cmath>
#include <functional>

#include "opsteer/error.hpp"

namespace opsteer {

namespace {

constexpr int kGridSize = 64;
constexpr double kGridLo = 1e-4;
constexpr double kGridHi = 1.0 - 1e-4;
constexpr double kBisectTol = 1e-10;
constexpr int kMaxBisect = 200;
constexpr double kCertTol = 1e-9;
constexpr double kMinRate = 1e-12;
constexpr double kRateCeiling = 1.0 - 1e-9;  // largest a the refinement may use
constexpr double kBSup = 1.0 - 1e-12;        // largest b considered

std::array<double, kGridSize> b_grid() {
  std::array<double, kGridSize> grid{};
  const double ratio = std::pow(kGridHi / kGridLo, 1.0 / (kGridSize - 1));
  double b = kGridLo;
  for (int k = 0; k < kGridSize; ++k) {
    grid[k] = b;
    b *= ratio;
  }
  grid.back() = kGridHi;
  return grid;
}

void validate(const FeasibilityProblem& p) {
  if (p.T < 1) throw Error(Errc::InvalidRange, "horizon T must be at least 1");
  if (!(p.eps > 0.0)) throw Error(Errc::InvalidRange, "eps must be positive");
  if (!(p.x0_err > 0.0 && p.x0_err <= 1.0)) throw Error(Errc::InvalidRange, "x0_err must lie in (0,1]");
  if (!(p.C_max > 0.0)) throw Error(Errc::InvalidRange, "C_max must be positive");
  if (!(p.S > 0.0 && std::isfinite(p.S))) throw Error(Errc::InvalidRange, "S must be positive");
}

// Root of f on [lo, hi] with f(lo) < 0 <= f(hi); returns the upper bracket end.
double bisect_upper(const std::function<double(double)>& f, double lo, double hi, int& iterations) {
  iterations = 0;
  while (hi - lo > kBisectTol) {
    if (++iterations > kMaxBisect) throw Error(Errc::NumericFailure, "bisection on b did not converge");
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

std::string_view to_string(FeasibilityFailure f) {
  switch (f) {
    case FeasibilityFailure::None: return "none";
    case FeasibilityFailure::Condition1: return "condition1";
    case FeasibilityFailure::Horizon: return "horizon";
  }
  return "unknown";
}

double geometric_sum(double b, int T) {
  if (T <= 0) return 0.0;
  if (b == 1.0) return static_cast<double>(T);
  const double one_minus_b = 1.0 - b;
  return -std::expm1(T * std::log1p(-one_minus_b)) / one_minus_b;
}

double schedule_progress(const RateSchedule& s, int T) { return s.a() * geometric_sum(s.b(), T); }

double error_bound(const RateSchedule& s, int T, double x0_err) {
  return std::exp(-schedule_progress(s, T)) * x0_err;
}

double asymptotic_error_bound(const RateSchedule& s, double x0_err) {
  return std::exp(-s.a() / (1.0 - s.b())) * x0_err;
}

double cost_of_schedule(const RateSchedule& s, int T, double S) { return schedule_progress(s, T) * S; }

double cost_weight_nonuniform(const Vec& h) { return (1.0 / h.array()).sum(); }

double cost_weight_uniform(int n, double h_max) { return n / h_max; }

bool check_condition1(const FeasibilityProblem& p) {
  validate(p);
  return p.eps >= p.x0_err * std::exp(-p.C_max / p.S);
}

FeasibilityResult solve_schedule(const FeasibilityProblem& p) {
  FeasibilityResult result;
  const double required = std::log(p.x0_err / p.eps);
  const double available = p.C_max / p.S;
  result.certificate.required = required;
  result.certificate.available = available;
  if (!check_condition1(p)) {
    result.failed = FeasibilityFailure::Condition1;
    return result;
  }

  std::optional<double> chosen_b;
  const auto grid = b_grid();
  for (int pass = 0; pass < 2 && !chosen_b; ++pass) {
    for (double b : grid) {
      const double g = geometric_sum(b, p.T);
      const double lo = required / g;
      const double hi = available / g;
      if (lo < 1.0 && lo <= hi && (pass == 1 || hi <= 1.0)) {
        chosen_b = b;
        break;
      }
    }
  }
  if (!chosen_b) {
    const double g_sup = geometric_sum(kBSup, p.T);
    if (!(kRateCeiling * g_sup > required)) {
      result.failed = FeasibilityFailure::Horizon;
      return result;
    }
    auto boundary = [&](double b) { return kRateCeiling * geometric_sum(b, p.T) - required; };
    chosen_b = bisect_upper(boundary, kGridHi, kBSup, result.bisection_iterations);
  }

  const double b = *chosen_b;
  const double g = geometric_sum(b, p.T);
  const double a = std::max(required / g, kMinRate);
  if (!(a < 1.0)) throw Error(Errc::NumericFailure, "refined schedule has a >= 1");
  RateSchedule schedule(a, b);

  Certificate& cert = result.certificate;
  cert.progress = schedule_progress(schedule, p.T);
  cert.required = required;
  cert.available = available;
  cert.error_bound = error_bound(schedule, p.T, p.x0_err);
  cert.cost = cost_of_schedule(schedule, p.T, p.S);
  const double slack_hi = kCertTol * std::max(1.0, available);
  const double slack_lo = kCertTol * std::max(1.0, std::abs(required));
  if (!(cert.progress <= available + slack_hi && cert.progress >= required - slack_lo))
    throw Error(Errc::NumericFailure, "certificate does not hold for the selected schedule");

  result.feasible = true;
  result.schedule = schedule;
  result.rate_cap_sufficient = available / g <= 1.0;
  return result;
}

RateSchedule max_progress_schedule(int T, double C_max, double S, double a_cap) {
  if (T < 1) throw Error(Errc::InvalidRange, "horizon T must be at least 1");
  if (!(C_max > 0.0) || !(S > 0.0)) throw Error(Errc::InvalidRange, "C_max and S must be positive");
  if (!(a_cap > 0.0 && a_cap < 1.0)) throw Error(Errc::InvalidRange, "a_cap must lie in (0,1)");
  const double available = C_max / S;
  const double g_lo = geometric_sum(kGridLo, T);
  if (available <= a_cap * g_lo) return RateSchedule(available / g_lo, kGridLo);
  if (available >= a_cap * geometric_sum(kBSup, T)) return RateSchedule(a_cap, kBSup);
  auto boundary = [&](double b) { return a_cap * geometric_sum(b, T) - available; };
  int iterations = 0;
  double lo = kGridLo, hi = kBSup;
  while (hi - lo > kBisectTol) {
    if (++iterations > kMaxBisect) throw Error(Errc::NumericFailure, "bisection on b did not converge");
    const double mid = 0.5 * (lo + hi);
    (boundary(mid) < 0.0 ? lo : hi) = mid;
  }
  return RateSchedule(a_cap, lo);
}

}  // namespace opsteer
