#pragma once

#include <Eigen/Dense>

namespace opsteer {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest singular value.
double spectral_norm(const Mat& m);

/// Smallest singular value, sqrt(lambda_min(M^T M)).
double min_singular_value(const Mat& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue_sym(const Mat& m);

double inf_norm(const Vec& v);

}  // namespace opsteer
