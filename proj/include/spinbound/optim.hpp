#pragma once

#include <functional>

#include <Eigen/Dense>

namespace spinbound::optim {

/// Returns f(x); writes the gradient when `grad` is non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct Options {
  int max_iterations = 500;
  double function_tolerance = 1e-13;
  double gradient_tolerance = 1e-11;
  double parameter_tolerance = 1e-12;
  // a run that stops for another reason still counts as converged when the
  // final gradient norm is below this
  double accept_gradient = 1e-6;
};

struct Result {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// L-BFGS minimisation of `f` starting from (and overwriting) `x`.
Result minimize(const Objective& f, Eigen::VectorXd& x, const Options& opts = {});

/// Central-difference gradient, used by tests to check analytic gradients.
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace spinbound::optim
