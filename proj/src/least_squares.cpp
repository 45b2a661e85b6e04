#include "levisim/least_squares.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace levisim {

namespace {

struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const ResidualFn* fn;
  int n_in;
  int n_out;

  int inputs() const { return n_in; }
  int values() const { return n_out; }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    r.resize(n_out);
    (*fn)(p, r);
    return r.allFinite() ? 0 : -1;
  }
};

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFn& residual, int n_residuals,
                                       const Eigen::VectorXd& start, int max_iterations) {
  const int n = static_cast<int>(start.size());
  Eigen::NumericalDiff<Functor> functor(Functor{&residual, n, n_residuals});
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(functor);
  lm.parameters.maxfev = max_iterations * (n + 1);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;

  LeastSquaresResult out;
  out.params = start;
  const auto status = lm.minimize(out.params);
  out.evaluations = static_cast<int>(lm.nfev);
  using S = Eigen::LevenbergMarquardtSpace::Status;
  out.converged = status == S::RelativeReductionTooSmall || status == S::RelativeErrorTooSmall ||
                  status == S::RelativeErrorAndReductionTooSmall || status == S::CosinusTooSmall ||
                  status == S::FtolTooSmall || status == S::XtolTooSmall ||
                  status == S::GtolTooSmall;

  Eigen::VectorXd r(n_residuals);
  residual(out.params, r);
  out.ssr = r.squaredNorm();

  // Central-difference Jacobian at the optimum for the covariance.
  Eigen::MatrixXd jac(n_residuals, n);
  Eigen::VectorXd rp(n_residuals);
  Eigen::VectorXd rm(n_residuals);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(out.params(k)));
    Eigen::VectorXd p = out.params;
    p(k) += h;
    residual(p, rp);
    p(k) -= 2.0 * h;
    residual(p, rm);
    jac.col(k) = (rp - rm) / (2.0 * h);
  }
  const double s2 = n_residuals > n ? out.ssr / (n_residuals - n) : 0.0;
  out.covariance = s2 * (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace levisim
