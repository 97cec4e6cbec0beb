#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "opsteer/network.hpp"

namespace opsteer {

/// Relative slack on PE level checks; the PE control attains the level with equality.
inline constexpr double kPeRelTol = 1e-9;

/// Linear-in-theta form of one plant step: x(t) = F_tilde + F theta, with
/// F = V diag(y), y = u o (d 1 - x(t-1)), F_tilde = V x(t-1).
struct Regressor {
  Mat F;
  Vec F_tilde;
  Vec y;
  double min_abs_y = 0.0;
  double lambda_V = 0.0;
};

Regressor build_regressor(const Vec& x_prev, const Vec& u, double d, const MixingMatrix& mixing);

/// x_hat = F_tilde + F theta_hat
Vec predict(const Regressor& reg, const Vec& theta_hat);

/// R = ||theta_err||^2 / (2 psi)
double lyapunov_value(const Vec& theta_err, double psi);

/// kappa = 2 psi (1 - psi beta^2 / 2) alpha^2. Throws InvalidGain unless
/// 0 < psi < 2/beta^2 and 0 <= alpha <= beta.
double kappa(double psi, double beta, double alpha);

/// sqrt(2 psi R0) (1 - kappa)^(t/2)
double theta_error_bound(double R0, double psi, double kappa, int t);

/// delta = alpha / (lambda_V u_max): the state margin at which the PE
/// control reaches its input bound.
double pe_margin(double alpha, double lambda_V, double u_max);

/// min_j |y_j| >= alpha / lambda_V is sufficient for PE at level alpha.
double pe_regressor_threshold(double alpha, double lambda_V);

struct PECheck {
  bool exact = false;       // lambda_min(F^T F) >= alpha^2
  bool sufficient = false;  // (min_j |y_j|)^2 lambda_V^2 >= alpha^2
  double min_eig = 0.0;     // lambda_min(F^T F)
  double sufficient_bound = 0.0;
};

PECheck verify_pe(const Regressor& reg, double alpha);

/// beta = ||V||_2 * y_sup, an upper bound on ||F_t||_2 whenever ||y||_inf <= y_sup.
double regressor_norm_bound(const MixingMatrix& mixing, double y_sup);

struct PEDiagnostics {
  double alpha = 0.0;
  double kappa = 0.0;
  double M_min_eig = 0.0;  // lambda_min(I - F Psi F^T / 2)
  double theta_err_bound = 0.0;
};

PEDiagnostics pe_diagnostics(const Regressor& reg, double psi, double beta, double alpha, double R0, int t);

struct EstimatorConfig {
  double psi = 0.0;
  double beta = 0.0;
  Vec theta_hat0;
  double clamp_lo = 1e-6;  // infinite bounds disable clamping
  double clamp_hi = 1.0;
  /// A-priori bound on ||theta - theta_hat0||_2.
  double theta_err0_bound = 0.0;
  /// Ground truth; enables R and the error-recursion residual (test mode).
  std::optional<Vec> theta_true;
};

struct EstimatorStep {
  int t = 0;
  Vec theta_hat;
  double pred_err_inf = 0.0;
  double R = 0.0;                   // NaN without ground truth
  double R_prev = 0.0;              // NaN without ground truth
  double recursion_residual = 0.0;  // ||err_raw - (I - psi F^T F) err_prev||_inf, NaN without truth
  double pe_alpha = 0.0;            // sigma_min(F_t)
  bool pe_ok = false;               // sigma_min(F_t) >= requested alpha (and > 0)
  double kappa = 0.0;               // per-step contraction guaranteed at pe_alpha
  double theta_err_bound = 0.0;     // running bound on ||theta_err(t)||_2
  bool clamped = false;
};

/// Gradient-type identification of theta with scalar gain Psi = psi I.
class Estimator {
 public:
  explicit Estimator(EstimatorConfig config);

  /// theta_hat <- clamp(theta_hat + psi F^T (x - x_hat)). Throws GainTooLarge
  /// if psi >= 2 / beta^2.
  const EstimatorStep& update(const Regressor& reg, const Vec& x_observed, double alpha_required = 0.0);

  const Vec& theta_hat() const { return theta_hat_; }
  double psi() const { return config_.psi; }
  double beta() const { return config_.beta; }
  int t() const { return t_; }
  /// Rigorous running bound on ||theta_err||_2 given the a-priori bound.
  double theta_err_bound() const { return err_bound_; }
  /// R(t), available only with ground truth.
  std::optional<double> lyapunov() const;
  const std::vector<EstimatorStep>& history() const { return history_; }

 private:
  EstimatorConfig config_;
  Vec theta_hat_;
  double err_bound_;
  int t_ = 0;
  std::vector<EstimatorStep> history_;
};

/// Columns: t, theta_hat_1..n, pred_err_inf, R, pe_ok, kappa.
void write_estimator_csv(std::ostream& out, const std::vector<EstimatorStep>& trace, Eigen::Index n);

}  // namespace opsteer
