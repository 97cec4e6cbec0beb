#include "opsteer/estimator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "opsteer/csv.hpp"
#include "opsteer/error.hpp"

namespace opsteer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Regressor build_regressor(const Vec& x_prev, const Vec& u, double d, const MixingMatrix& mixing) {
  if (x_prev.size() != mixing.V.rows() || u.size() != x_prev.size())
    throw Error(Errc::InvalidInput, "regressor inputs have inconsistent shapes");
  Regressor reg;
  reg.y = (u.array() * (d - x_prev.array())).matrix();
  reg.F = mixing.V * reg.y.asDiagonal();
  reg.F_tilde = mixing.V * x_prev;
  reg.min_abs_y = reg.y.cwiseAbs().minCoeff();
  reg.lambda_V = mixing.lambda_V;
  return reg;
}

Vec predict(const Regressor& reg, const Vec& theta_hat) { return reg.F_tilde + reg.F * theta_hat; }

double lyapunov_value(const Vec& theta_err, double psi) {
  if (!(psi > 0.0)) throw Error(Errc::InvalidGain, "psi must be positive");
  return theta_err.squaredNorm() / (2.0 * psi);
}

double kappa(double psi, double beta, double alpha) {
  if (!(beta > 0.0) || !(psi > 0.0) || !(psi < 2.0 / (beta * beta)))
    throw Error(Errc::InvalidGain, "need 0 < psi < 2/beta^2");
  if (!(alpha >= 0.0 && alpha <= beta)) throw Error(Errc::InvalidGain, "need 0 <= alpha <= beta");
  return 2.0 * psi * (1.0 - 0.5 * psi * beta * beta) * alpha * alpha;
}

double theta_error_bound(double R0, double psi, double kappa, int t) {
  return std::sqrt(2.0 * psi * R0) * std::pow(1.0 - kappa, 0.5 * t);
}

double pe_margin(double alpha, double lambda_V, double u_max) { return alpha / (lambda_V * u_max); }

double pe_regressor_threshold(double alpha, double lambda_V) { return alpha / lambda_V; }

PECheck verify_pe(const Regressor& reg, double alpha) {
  PECheck check;
  check.min_eig = std::max(min_eigenvalue_sym(reg.F.transpose() * reg.F), 0.0);
  check.sufficient_bound = reg.min_abs_y * reg.min_abs_y * reg.lambda_V * reg.lambda_V;
  const double need = alpha * alpha;
  check.exact = check.min_eig > 0.0 && check.min_eig >= need * (1.0 - 2.0 * kPeRelTol);
  check.sufficient = check.sufficient_bound > 0.0 && check.sufficient_bound >= need * (1.0 - 2.0 * kPeRelTol);
  return check;
}

double regressor_norm_bound(const MixingMatrix& mixing, double y_sup) { return spectral_norm(mixing.V) * y_sup; }

PEDiagnostics pe_diagnostics(const Regressor& reg, double psi, double beta, double alpha, double R0, int t) {
  PEDiagnostics diag;
  diag.alpha = alpha;
  diag.kappa = kappa(psi, beta, alpha);
  const auto n = reg.F.rows();
  diag.M_min_eig = min_eigenvalue_sym(Mat::Identity(n, n) - 0.5 * psi * reg.F * reg.F.transpose());
  diag.theta_err_bound = theta_error_bound(R0, psi, diag.kappa, t);
  return diag;
}

Estimator::Estimator(EstimatorConfig config) : config_(std::move(config)) {
  if (!(config_.beta > 0.0)) throw Error(Errc::InvalidGain, "beta must be positive");
  if (!(config_.psi > 0.0)) throw Error(Errc::InvalidGain, "psi must be positive");
  if (!(config_.clamp_lo <= config_.clamp_hi)) throw Error(Errc::InvalidRange, "clamp range must satisfy lo <= hi");
  if (config_.theta_true && config_.theta_true->size() != config_.theta_hat0.size())
    throw Error(Errc::InvalidInput, "theta_true has wrong dimension");
  theta_hat_ = config_.theta_hat0.cwiseMax(config_.clamp_lo).cwiseMin(config_.clamp_hi);
  err_bound_ = config_.theta_err0_bound;
}

std::optional<double> Estimator::lyapunov() const {
  if (!config_.theta_true) return std::nullopt;
  return lyapunov_value(*config_.theta_true - theta_hat_, config_.psi);
}

const EstimatorStep& Estimator::update(const Regressor& reg, const Vec& x_observed, double alpha_required) {
  const double psi = config_.psi;
  const double beta = config_.beta;
  if (!(psi < 2.0 / (beta * beta))) throw Error(Errc::GainTooLarge, "psi >= 2/beta^2");
  if (reg.F.cols() != theta_hat_.size()) throw Error(Errc::InvalidInput, "regressor has wrong dimension");

  EstimatorStep s;
  s.t = ++t_;
  const Vec x_hat = predict(reg, theta_hat_);
  const Vec pred_err = x_observed - x_hat;
  s.pred_err_inf = inf_norm(pred_err);
  const Vec raw = theta_hat_ + psi * (reg.F.transpose() * pred_err);
  const Vec clamped = raw.cwiseMax(config_.clamp_lo).cwiseMin(config_.clamp_hi);
  s.clamped = clamped != raw;

  Eigen::JacobiSVD<Mat> svd(reg.F);
  const Vec sigma = svd.singularValues();
  s.pe_alpha = sigma.minCoeff();
  s.pe_ok = s.pe_alpha > 0.0 && s.pe_alpha >= alpha_required * (1.0 - kPeRelTol);
  const double f_norm = sigma.maxCoeff();
  if (f_norm <= beta * (1.0 + 1e-12)) {
    s.kappa = kappa(psi, beta, std::min(s.pe_alpha, beta));
    err_bound_ *= std::sqrt(std::max(0.0, 1.0 - s.kappa));
  } else {
    double factor = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) factor = std::max(factor, std::abs(1.0 - psi * sigma(i) * sigma(i)));
    s.kappa = 0.0;
    err_bound_ *= std::max(factor, 1.0);
  }
  s.theta_err_bound = err_bound_;

  if (config_.theta_true) {
    const Vec& theta = *config_.theta_true;
    const Vec err_prev = theta - theta_hat_;
    const Vec err_raw = theta - raw;
    const auto n = theta.size();
    const Vec predicted = (Mat::Identity(n, n) - psi * reg.F.transpose() * reg.F) * err_prev;
    s.recursion_residual = inf_norm(err_raw - predicted);
    s.R_prev = lyapunov_value(err_prev, psi);
    s.R = lyapunov_value(theta - clamped, psi);
  } else {
    s.recursion_residual = kNaN;
    s.R_prev = kNaN;
    s.R = kNaN;
  }
  theta_hat_ = clamped;
  s.theta_hat = theta_hat_;
  history_.push_back(std::move(s));
  return history_.back();
}

void write_estimator_csv(std::ostream& out, const std::vector<EstimatorStep>& trace, Eigen::Index n) {
  CsvWriter csv(out);
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 1; i <= n; ++i) header.push_back("theta_hat_" + std::to_string(i));
  header.insert(header.end(), {"pred_err_inf", "R", "pe_ok", "kappa"});
  csv.header(header);
  for (const auto& s : trace) {
    csv.field(s.t);
    for (Eigen::Index i = 0; i < n; ++i) csv.field(s.theta_hat(i));
    csv.field(s.pred_err_inf);
    csv.field(s.R);
    csv.field(s.pe_ok ? 1 : 0);
    csv.field(s.kappa);
    csv.end_row();
  }
}

}  // namespace opsteer
