#include "spinbound/optim.hpp"

#include <cmath>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

namespace spinbound::optim {

namespace {

class Adapter final : public ceres::FirstOrderFunction {
 public:
  Adapter(const Objective& f, int n) : f_(f), n_(n) {}
  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> x(params, n_);
    Eigen::VectorXd g;
    *cost = f_(x, gradient ? &g : nullptr);
    if (!std::isfinite(*cost)) return false;
    if (gradient) Eigen::Map<Eigen::VectorXd>(gradient, n_) = g;
    return true;
  }
  int NumParameters() const override { return n_; }

 private:
  const Objective& f_;
  int n_;
};

}  // namespace

Result minimize(const Objective& f, Eigen::VectorXd& x, const Options& opts) {
  const int n = static_cast<int>(x.size());
  ceres::GradientProblem problem(new Adapter(f, n));
  ceres::GradientProblemSolver::Options o;
  o.line_search_direction_type = ceres::LBFGS;
  o.max_num_iterations = opts.max_iterations;
  o.function_tolerance = opts.function_tolerance;
  o.gradient_tolerance = opts.gradient_tolerance;
  o.parameter_tolerance = opts.parameter_tolerance;
  o.logging_type = ceres::SILENT;
  o.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(o, problem, x.data(), &summary);

  Eigen::VectorXd g;
  Result r;
  r.value = f(x, &g);
  r.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  r.iterations = static_cast<int>(summary.iterations.size());
  r.converged = summary.termination_type == ceres::CONVERGENCE || r.gradient_norm <= opts.accept_gradient;
  return r;
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                 double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + step;
    const double fp = f(y);
    y(i) = x(i) - step;
    const double fm = f(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace spinbound::optim
