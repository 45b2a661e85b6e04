#pragma once

#include <Eigen/Core>

#include <functional>

namespace levisim {

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 with s^2 = SSR / (m - n)
  double ssr = 0.0;            // sum of squared residuals
  int evaluations = 0;
  bool converged = false;
};

/// r(p) must fill a vector of the given length.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

/// Levenberg-Marquardt with a forward-difference Jacobian (Eigen's MINPACK
/// port). max_iterations bounds the outer iterations.
LeastSquaresResult levenberg_marquardt(const ResidualFn& residual, int n_residuals,
                                       const Eigen::VectorXd& start, int max_iterations = 200);

}  // namespace levisim
