#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "spinbound/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "spinbound/optim.hpp"
#include "spinbound/random.hpp"

namespace spinbound::oracles {

using qcore::Complex;
using qcore::DimensionError;
using qcore::RealVector;
using qcore::ValidationError;

void OptimizerConfig::validate() const {
  if (restarts < 1 || max_iterations < 1 || !(feasibility_tol > 0.0) || !(objective_tol > 0.0) || ensemble_size < 0)
    throw ValidationError("optimizer configuration values must be positive");
}

// ---------------------------------------------------------------------------
// ProductEnsemble

int ProductEnsemble::parties() const { return locals.empty() ? 0 : static_cast<int>(locals.front().size()); }

void ProductEnsemble::validate() const {
  if (weights.empty() || weights.size() != locals.size()) throw ValidationError("ensemble: weights and locals differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("ensemble: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("ensemble: weights do not sum to one");
  const int p = parties();
  if (p < 1) throw ValidationError("ensemble: no parties");
  for (const auto& comp : locals) {
    if (static_cast<int>(comp.size()) != p) throw ValidationError("ensemble: inconsistent party count");
    for (int n = 0; n < p; ++n) {
      if (comp[n].size() != locals.front()[n].size()) throw DimensionError("ensemble: inconsistent local dimension");
      if (std::abs(comp[n].norm() - 1.0) > 1e-10) throw ValidationError("ensemble: local vector is not normalized");
    }
  }
}

Matrix ProductEnsemble::assemble() const {
  Matrix out;
  for (size_t k = 0; k < weights.size(); ++k) {
    Vector v = locals[k][0];
    for (size_t n = 1; n < locals[k].size(); ++n) v = qcore::tensor(v, locals[k][n]);
    if (k == 0) out = Matrix::Zero(v.size(), v.size());
    out += weights[k] * v * v.adjoint();
  }
  return out;
}

Matrix ProductEnsemble::marginal(int party) const {
  if (party < 0 || party >= parties()) throw DimensionError("ensemble: party out of range");
  const auto d = locals.front()[party].size();
  Matrix m = Matrix::Zero(d, d);
  for (size_t k = 0; k < weights.size(); ++k) m += weights[k] * locals[k][party] * locals[k][party].adjoint();
  return m;
}

ProductEnsemble ProductEnsemble::replicate(int n) const {
  if (parties() != 1) throw ValidationError("replicate: ensemble must describe a single party");
  ProductEnsemble e;
  e.weights = weights;
  for (const auto& comp : locals) e.locals.emplace_back(static_cast<size_t>(n), comp[0]);
  return e;
}

namespace {

// ---------------------------------------------------------------------------
// shared helpers

void unpack(const Eigen::VectorXd& x, Eigen::Index offset, Vector& out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = Complex(x(offset + 2 * i), x(offset + 2 * i + 1));
}

void pack(const Vector& v, Eigen::Index offset, Eigen::VectorXd& out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(offset + 2 * i) = v(i).real();
    out(offset + 2 * i + 1) = v(i).imag();
  }
}

Vector ginibre_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

struct Spectral {
  RealVector values;
  Matrix vectors;
  int rank = 0;
};

Spectral spectral(const Matrix& rho) {
  const auto e = qcore::eig_hermitian(rho);
  Spectral s{e.values, e.vectors, 0};
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > qcore::kClipTol) ++s.rank;
  return s;
}

bool is_pure(const Matrix& rho) { return spectral(rho).values.maxCoeff() > 1.0 - 1e-12; }

Matrix inv_sqrt(const Matrix& a) {
  const auto e = qcore::eig_hermitian(0.5 * (a + a.adjoint()));
  RealVector s = e.values.unaryExpr([](double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); });
  return e.vectors * s.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

double min_eig(const Matrix& a) { return qcore::eig_hermitian(0.5 * (a + a.adjoint())).values.minCoeff(); }

optim::Options inner_options(const OptimizerConfig& cfg) {
  optim::Options o;
  o.max_iterations = cfg.max_iterations;
  o.function_tolerance = cfg.objective_tol;
  return o;
}

// ---------------------------------------------------------------------------
// pure-state decompositions: columns of C U^T with U = W (W^dag W)^(-1/2)

class RoofProblem {
 public:
  RoofProblem(const DensityMatrix& rho, const std::vector<Observable>& hs, int K, double sign) : K_(K), sign_(sign) {
    const Spectral s = spectral(rho.matrix());
    const auto d = rho.dim();
    r_ = s.rank;
    C_ = Matrix(d, r_);
    int c = 0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
      if (s.values(i) > qcore::kClipTol) C_.col(c++) = std::sqrt(s.values(i)) * s.vectors.col(i);
    for (const auto& h : hs) h_.push_back(h.matrix());
  }

  int parameters() const { return 2 * K_ * r_; }
  int rank() const { return r_; }

  Matrix polar(const Eigen::VectorXd& x, Matrix* w_out, Matrix* q_out, RealVector* s_out) const {
    Matrix W(K_, r_);
    for (int i = 0; i < r_; ++i)
      for (int k = 0; k < K_; ++k) W(k, i) = Complex(x(2 * (i * K_ + k)), x(2 * (i * K_ + k) + 1));
    const auto e = qcore::eig_hermitian(W.adjoint() * W);
    RealVector s = e.values.unaryExpr([](double v) { return std::sqrt(std::max(v, 1e-300)); });
    RealVector sinv = s.cwiseInverse();
    Matrix U = W * (e.vectors * sinv.cast<Complex>().asDiagonal() * e.vectors.adjoint());
    if (w_out) *w_out = std::move(W);
    if (q_out) *q_out = e.vectors;
    if (s_out) *s_out = s;
    return U;
  }

  Matrix components(const Eigen::VectorXd& x) const { return C_ * polar(x, nullptr, nullptr, nullptr).transpose(); }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    Matrix Q;
    RealVector s;
    const Matrix U = polar(x, nullptr, &Q, &s);
    const Matrix psi = C_ * U.transpose();
    Matrix G = Matrix::Zero(psi.rows(), psi.cols());
    double f = 0.0;
    for (int k = 0; k < K_; ++k) {
      const Vector p = psi.col(k);
      const double n = p.squaredNorm();
      if (n < 1e-300) continue;
      double c = 0.0;
      for (const auto& h : h_) {
        const Vector hp = h * p;
        const double a = p.dot(hp).real();
        f += a * a / n;
        c += a * a / (n * n);
        if (grad) G.col(k) += (2.0 * a / n) * hp;
      }
      if (grad) G.col(k) -= c * p;
    }
    if (grad) {
      const Matrix GU = (C_.adjoint() * G).transpose();
      const Matrix B = U.adjoint() * GU;
      Matrix Bt = Q.adjoint() * B * Q;
      for (int i = 0; i < r_; ++i)
        for (int j = 0; j < r_; ++j) Bt(i, j) /= (s(i) + s(j));
      Bt = Q * Bt * Q.adjoint();
      const Matrix Pinv = Q * s.cwiseInverse().cast<Complex>().asDiagonal() * Q.adjoint();
      const Matrix A = (GU - U * B) * Pinv + U * (Bt - Bt.adjoint());
      grad->resize(parameters());
      for (int i = 0; i < r_; ++i)
        for (int k = 0; k < K_; ++k) {
          (*grad)(2 * (i * K_ + k)) = 2.0 * sign_ * A(k, i).real();
          (*grad)(2 * (i * K_ + k) + 1) = 2.0 * sign_ * A(k, i).imag();
        }
    }
    return sign_ * f;
  }

 private:
  int K_;
  int r_ = 0;
  double sign_;
  Matrix C_;
  std::vector<Matrix> h_;
};

ProductEnsemble ensemble_from_columns(const Matrix& psi) {
  ProductEnsemble e;
  double total = 0.0;
  for (Eigen::Index k = 0; k < psi.cols(); ++k) {
    const double n = psi.col(k).squaredNorm();
    if (n < 1e-15) continue;
    e.weights.push_back(n);
    e.locals.push_back({psi.col(k) / std::sqrt(n)});
    total += n;
  }
  for (double& w : e.weights) w /= total;
  return e;
}

OptimizationResult roof_search(const DensityMatrix& rho, const std::vector<Observable>& hs, const OptimizerConfig& cfg,
                               Direction dir) {
  cfg.validate();
  if (hs.empty()) throw ValidationError("roof: observable list is empty");
  for (const auto& h : hs)
    if (h.dim() != rho.dim()) throw DimensionError("roof: observable dimension differs from state");
  const int d = static_cast<int>(rho.dim());
  const int K = cfg.ensemble_size > 0 ? cfg.ensemble_size : d * d;
  const double sign = dir == Direction::maximize ? -1.0 : 1.0;
  const RoofProblem prob(rho, hs, K, sign);
  if (K < prob.rank()) throw ValidationError("roof: ensemble size below the rank of the state");
  const optim::Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return prob(x, g); };

  OptimizationResult best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd x(prob.parameters());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::normal_distribution<double>(0.0, 1.0)(rng);
    const auto res = optim::minimize(f, x, inner_options(cfg));
    best.restarts++;
    if (res.converged) best.restarts_converged++;
    ProductEnsemble e = ensemble_from_columns(prob.components(x));
    const double v = roof_functional(e, hs);
    const bool better = !have || (dir == Direction::maximize ? v > best.value : v < best.value);
    if (better) {
      have = true;
      best.value = v;
      best.ensemble = std::move(e);
      best.converged = res.converged;
    }
  }
  best.feasibility_residual = qcore::max_abs(best.ensemble.assemble() - rho.matrix());
  return best;
}

// ---------------------------------------------------------------------------
// separable couplings: components x_k (x) y_k with unnormalised x_k, y_k

class CoupleProblem {
 public:
  CoupleProblem(const Matrix& rho, const Matrix& sigma, const Matrix& obj, int K, double sign)
      : d_(static_cast<int>(rho.rows())), K_(K), sign_(sign), rho_(rho), sigma_(sigma), obj_(obj) {
    la_ = Matrix::Zero(d_, d_);
    lb_ = Matrix::Zero(d_, d_);
  }

  int parameters() const { return 4 * d_ * K_; }

  void split(const Eigen::VectorXd& x, std::vector<Vector>& xs, std::vector<Vector>& ys) const {
    xs.assign(K_, Vector(d_));
    ys.assign(K_, Vector(d_));
    for (int k = 0; k < K_; ++k) {
      unpack(x, 4 * d_ * k, xs[k]);
      unpack(x, 4 * d_ * k + 2 * d_, ys[k]);
    }
  }

  void join(const std::vector<Vector>& xs, const std::vector<Vector>& ys, Eigen::VectorXd& x) const {
    x.resize(parameters());
    for (int k = 0; k < K_; ++k) {
      pack(xs[k], 4 * d_ * k, x);
      pack(ys[k], 4 * d_ * k + 2 * d_, x);
    }
  }

  void marginals(const std::vector<Vector>& xs, const std::vector<Vector>& ys, Matrix& a, Matrix& b) const {
    a = Matrix::Zero(d_, d_);
    b = Matrix::Zero(d_, d_);
    for (int k = 0; k < K_; ++k) {
      a += ys[k].squaredNorm() * xs[k] * xs[k].adjoint();
      b += xs[k].squaredNorm() * ys[k] * ys[k].adjoint();
    }
  }

  double residual(const Eigen::VectorXd& x) const {
    std::vector<Vector> xs, ys;
    split(x, xs, ys);
    Matrix a, b;
    marginals(xs, ys, a, b);
    return std::max(qcore::max_abs(a - rho_), qcore::max_abs(b - sigma_));
  }

  double objective(const std::vector<Vector>& xs, const std::vector<Vector>& ys) const {
    double v = 0.0;
    for (int k = 0; k < K_; ++k) {
      const Vector z = qcore::tensor(xs[k], ys[k]);
      v += z.dot(obj_ * z).real();
    }
    return v;
  }

  void update_multipliers(const Eigen::VectorXd& x) {
    std::vector<Vector> xs, ys;
    split(x, xs, ys);
    Matrix a, b;
    marginals(xs, ys, a, b);
    la_ += mu_ * (a - rho_);
    lb_ += mu_ * (b - sigma_);
  }

  void set_mu(double mu) { mu_ = mu; }
  double mu() const { return mu_; }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    std::vector<Vector> xs, ys;
    split(x, xs, ys);
    Matrix a, b;
    marginals(xs, ys, a, b);
    const Matrix ra = a - rho_, rb = b - sigma_;
    double L = (la_ * ra).trace().real() + (lb_ * rb).trace().real() +
               0.5 * mu_ * (ra.squaredNorm() + rb.squaredNorm());
    const Matrix ta = la_ + mu_ * ra, tb = lb_ + mu_ * rb;
    if (grad) grad->resize(parameters());
    for (int k = 0; k < K_; ++k) {
      const Vector z = qcore::tensor(xs[k], ys[k]);
      const Vector oz = obj_ * z;
      L += sign_ * z.dot(oz).real();
      if (!grad) continue;
      Vector mx = Vector::Zero(d_), ny = Vector::Zero(d_);
      for (int p = 0; p < d_; ++p)
        for (int q = 0; q < d_; ++q) {
          mx(p) += std::conj(ys[k](q)) * oz(p * d_ + q);
          ny(q) += std::conj(xs[k](p)) * oz(p * d_ + q);
        }
      const double nx = xs[k].squaredNorm(), nyy = ys[k].squaredNorm();
      const double yby = ys[k].dot(tb * ys[k]).real();
      const double xax = xs[k].dot(ta * xs[k]).real();
      const Vector gx = sign_ * mx + nyy * (ta * xs[k]) + yby * xs[k];
      const Vector gy = sign_ * ny + nx * (tb * ys[k]) + xax * ys[k];
      pack(2.0 * gx, 4 * d_ * k, *grad);
      pack(2.0 * gy, 4 * d_ * k + 2 * d_, *grad);
    }
    return L;
  }

  // Alternating congruence scaling that restores both marginals exactly.
  void polish(Eigen::VectorXd& x) const {
    std::vector<Vector> xs, ys;
    split(x, xs, ys);
    const Matrix rs = qcore::psd_sqrt(rho_), ss = qcore::psd_sqrt(sigma_);
    for (int it = 0; it < 200; ++it) {
      Matrix a, b;
      marginals(xs, ys, a, b);
      if (std::max(qcore::max_abs(a - rho_), qcore::max_abs(b - sigma_)) < 1e-14) break;
      const Matrix ma = rs * inv_sqrt(a);
      for (auto& v : xs) v = ma * v;
      marginals(xs, ys, a, b);
      const Matrix mb = ss * inv_sqrt(b);
      for (auto& v : ys) v = mb * v;
    }
    join(xs, ys, x);
  }

  ProductEnsemble ensemble(const Eigen::VectorXd& x) const {
    std::vector<Vector> xs, ys;
    split(x, xs, ys);
    ProductEnsemble e;
    double total = 0.0;
    for (int k = 0; k < K_; ++k) {
      const double nx = xs[k].norm(), ny = ys[k].norm();
      const double w = nx * nx * ny * ny;
      if (w < 1e-15) continue;
      e.weights.push_back(w);
      e.locals.push_back({xs[k] / nx, ys[k] / ny});
      total += w;
    }
    for (double& w : e.weights) w /= total;
    return e;
  }

 private:
  int d_, K_;
  double sign_;
  Matrix rho_, sigma_, obj_;
  Matrix la_, lb_;
  double mu_ = 1e2;
};

// Runs the augmented-Lagrangian schedule on a problem exposing
// operator(), residual(), update_multipliers(), set_mu() and polish().
template <class Problem>
optim::Result augmented_lagrangian(Problem& prob, Eigen::VectorXd& x, const OptimizerConfig& cfg) {
  const optim::Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g) { return prob(v, g); };
  double mu = 1e2;
  prob.set_mu(mu);
  double prev = std::numeric_limits<double>::infinity();
  optim::Result res;
  for (int outer = 0; outer < 40; ++outer) {
    res = optim::minimize(f, x, inner_options(cfg));
    const double r = prob.residual(x);
    prob.update_multipliers(x);
    if (r < 1e-11 && res.converged) break;
    if (r > 0.25 * prev && mu < 1e8) {
      mu = std::min(mu * 10.0, 1e8);
      prob.set_mu(mu);
    }
    prev = r;
  }
  return res;
}

// value of Tr(O rho (x) sigma) with a product ensemble when a marginal is pure
OptimizationResult forced_product(const Matrix& rho, const Matrix& sigma, const Matrix& obj) {
  OptimizationResult out;
  const Spectral a = spectral(rho), b = spectral(sigma);
  for (Eigen::Index i = 0; i < a.values.size(); ++i)
    for (Eigen::Index j = 0; j < b.values.size(); ++j) {
      const double w = a.values(i) * b.values(j);
      if (w < 1e-15) continue;
      out.ensemble.weights.push_back(w);
      out.ensemble.locals.push_back({a.vectors.col(i), b.vectors.col(j)});
    }
  double total = 0.0;
  for (double w : out.ensemble.weights) total += w;
  for (double& w : out.ensemble.weights) w /= total;
  out.value = qcore::expect(qcore::tensor(rho, sigma), obj);
  out.converged = true;
  out.restarts = out.restarts_converged = 1;
  out.feasibility_residual = std::max(qcore::max_abs(out.ensemble.marginal(0) - rho),
                                      qcore::max_abs(out.ensemble.marginal(1) - sigma));
  return out;
}

// ---------------------------------------------------------------------------
// arbitrary couplings: gamma = X X^dag

class AnyStateProblem {
 public:
  AnyStateProblem(const Matrix& rho, const Matrix& sigma, const Matrix& obj, double sign)
      : d_(static_cast<int>(rho.rows())), sign_(sign), rho_(rho), sigma_(sigma), obj_(obj) {
    la_ = Matrix::Zero(d_, d_);
    lb_ = Matrix::Zero(d_, d_);
  }

  int dim() const { return d_ * d_; }
  int parameters() const { return 2 * dim() * dim(); }

  Matrix unpack_x(const Eigen::VectorXd& x) const {
    Matrix X(dim(), dim());
    for (int j = 0; j < dim(); ++j)
      for (int i = 0; i < dim(); ++i) X(i, j) = Complex(x(2 * (j * dim() + i)), x(2 * (j * dim() + i) + 1));
    return X;
  }

  void pack_x(const Matrix& X, Eigen::VectorXd& x) const {
    x.resize(parameters());
    for (int j = 0; j < dim(); ++j)
      for (int i = 0; i < dim(); ++i) {
        x(2 * (j * dim() + i)) = X(i, j).real();
        x(2 * (j * dim() + i) + 1) = X(i, j).imag();
      }
  }

  void marginals(const Matrix& s, Matrix& a, Matrix& b) const {
    const int dims[2] = {d_, d_};
    const int ka[1] = {0}, kb[1] = {1};
    a = qcore::partial_trace(s, dims, ka);
    b = qcore::partial_trace(s, dims, kb);
  }

  double residual(const Eigen::VectorXd& x) const {
    const Matrix X = unpack_x(x);
    Matrix a, b;
    marginals(X * X.adjoint(), a, b);
    return std::max(qcore::max_abs(a - rho_), qcore::max_abs(b - sigma_));
  }

  void update_multipliers(const Eigen::VectorXd& x) {
    const Matrix X = unpack_x(x);
    Matrix a, b;
    marginals(X * X.adjoint(), a, b);
    la_ += mu_ * (a - rho_);
    lb_ += mu_ * (b - sigma_);
  }

  void set_mu(double mu) { mu_ = mu; }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const Matrix X = unpack_x(x);
    const Matrix s = X * X.adjoint();
    Matrix a, b;
    marginals(s, a, b);
    const Matrix ra = a - rho_, rb = b - sigma_;
    const double L = sign_ * qcore::expect(s, obj_) + (la_ * ra).trace().real() + (lb_ * rb).trace().real() +
                     0.5 * mu_ * (ra.squaredNorm() + rb.squaredNorm());
    if (grad) {
      const Matrix id = Matrix::Identity(d_, d_);
      const Matrix ta = la_ + mu_ * ra, tb = lb_ + mu_ * rb;
      const Matrix g = (sign_ * obj_ + qcore::tensor(ta, id) + qcore::tensor(id, tb)) * X;
      pack_x(2.0 * g, *grad);
    }
    return L;
  }

  void polish(Eigen::VectorXd& x) const {
    Matrix X = unpack_x(x);
    const Matrix rs = qcore::psd_sqrt(rho_), ss = qcore::psd_sqrt(sigma_);
    const Matrix id = Matrix::Identity(d_, d_);
    for (int it = 0; it < 200; ++it) {
      Matrix a, b;
      marginals(X * X.adjoint(), a, b);
      if (std::max(qcore::max_abs(a - rho_), qcore::max_abs(b - sigma_)) < 1e-14) break;
      X = qcore::tensor(Matrix(rs * inv_sqrt(a)), id) * X;
      marginals(X * X.adjoint(), a, b);
      X = qcore::tensor(id, Matrix(ss * inv_sqrt(b))) * X;
    }
    pack_x(X, x);
  }

 private:
  int d_;
  double sign_;
  Matrix rho_, sigma_, obj_;
  Matrix la_, lb_;
  double mu_ = 1e2;
};

void check_pair(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective) {
  if (rho.dim() != sigma.dim()) throw DimensionError("coupling: marginals must have equal dimension");
  if (objective.dim() != rho.dim() * sigma.dim()) throw DimensionError("coupling: objective must act on the pair");
}

}  // namespace

// ---------------------------------------------------------------------------

GroundState ground_state(const Observable& h) {
  const Matrix& m = h.matrix();
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (m.rows() > models::kMaxDenseDim) throw DimensionError("ground_state: dimension exceeds dense limit of 4096");
  GroundState gs;
  lapack_int found = 0;
  std::vector<lapack_int> support(2);
  std::vector<double> w(static_cast<size_t>(n));
  const double abstol = LAPACKE_dlamch('S');
  lapack_int info = 0;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::MatrixXd a = m.real();
    Eigen::VectorXd z(n);
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0, 1, 1, abstol, &found, w.data(),
                          z.data(), n, support.data());
    gs.state = z.cast<Complex>();
  } else {
    Matrix a = m;
    Vector z(n);
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0, 1, 1, abstol, &found, w.data(),
                          z.data(), n, support.data());
    gs.state = z;
  }
  if (info != 0 || found != 1) throw qcore::NonConvergenceError("ground_state: eigensolver failed");
  gs.energy = w[0];
  gs.state /= gs.state.norm();
  gs.residual = (m * gs.state - gs.energy * gs.state).norm();
  return gs;
}

double roof_functional(const ProductEnsemble& e, const std::vector<Observable>& hs) {
  if (e.parties() != 1) throw ValidationError("roof_functional: ensemble must describe a single party");
  double v = 0.0;
  for (size_t k = 0; k < e.weights.size(); ++k)
    for (const auto& h : hs) {
      const double m = qcore::expect(e.locals[k][0], h.matrix());
      v += e.weights[k] * m * m;
    }
  return v;
}

OptimizationResult roof_max(const DensityMatrix& rho, const std::vector<Observable>& hs, const OptimizerConfig& cfg) {
  return roof_search(rho, hs, cfg, Direction::maximize);
}

OptimizationResult roof_min(const DensityMatrix& rho, const std::vector<Observable>& hs, const OptimizerConfig& cfg) {
  return roof_search(rho, hs, cfg, Direction::minimize);
}

OptimizationResult sep_couple_opt(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                                  Direction direction, const OptimizerConfig& cfg) {
  cfg.validate();
  check_pair(rho, sigma, objective);
  const int d = static_cast<int>(rho.dim());
  if (d > 3) throw qcore::UnsupportedError("sep_couple_opt: local dimension above 3 is not supported");
  if (is_pure(rho.matrix()) || is_pure(sigma.matrix()))
    return forced_product(rho.matrix(), sigma.matrix(), objective.matrix());

  const int K = cfg.ensemble_size > 0 ? cfg.ensemble_size : d * d * d * d;
  const double sign = direction == Direction::maximize ? -1.0 : 1.0;
  const bool full_rank = min_eig(rho.matrix()) > 1e-10 && min_eig(sigma.matrix()) > 1e-10;
  const RoofProblem seed_decomp(rho, {Observable(Matrix::Zero(d, d))}, K, 1.0);

  OptimizationResult best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    CoupleProblem prob(rho.matrix(), sigma.matrix(), objective.matrix(), K, sign);
    // start from a random decomposition of rho paired with random unit vectors
    Eigen::VectorXd w(seed_decomp.parameters());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::normal_distribution<double>(0.0, 1.0)(rng);
    const Matrix cols = seed_decomp.components(w);
    std::vector<Vector> xs(K), ys(K);
    for (int k = 0; k < K; ++k) {
      xs[k] = cols.col(k);
      ys[k] = ginibre_vector(d, rng);
      ys[k] /= ys[k].norm();
    }
    Eigen::VectorXd x;
    prob.join(xs, ys, x);
    const auto res = augmented_lagrangian(prob, x, cfg);
    if (full_rank) prob.polish(x);
    const double resid = prob.residual(x);
    const bool ok = res.converged && resid <= cfg.feasibility_tol;
    best.restarts++;
    if (ok) best.restarts_converged++;
    std::vector<Vector> fx, fy;
    prob.split(x, fx, fy);
    const double v = prob.objective(fx, fy);
    const bool better = !have || (ok && !best.converged) ||
                        (ok == best.converged && (direction == Direction::maximize ? v > best.value : v < best.value));
    if (better) {
      have = true;
      best.value = v;
      best.ensemble = prob.ensemble(x);
      best.converged = ok;
    }
  }
  best.feasibility_residual = std::max(qcore::max_abs(best.ensemble.marginal(0) - rho.matrix()),
                                       qcore::max_abs(best.ensemble.marginal(1) - sigma.matrix()));
  best.value = qcore::expect(best.ensemble.assemble(), objective.matrix());
  return best;
}

AnyStateResult any_state_opt(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                             Direction direction, const OptimizerConfig& cfg) {
  cfg.validate();
  check_pair(rho, sigma, objective);
  AnyStateResult best;
  if (is_pure(rho.matrix()) || is_pure(sigma.matrix())) {
    best.state = qcore::tensor(rho.matrix(), sigma.matrix());
    best.value = qcore::expect(best.state, objective.matrix());
    best.converged = true;
    best.restarts = best.restarts_converged = 1;
    return best;
  }
  const double sign = direction == Direction::maximize ? -1.0 : 1.0;
  const bool full_rank = min_eig(rho.matrix()) > 1e-10 && min_eig(sigma.matrix()) > 1e-10;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    AnyStateProblem prob(rho.matrix(), sigma.matrix(), objective.matrix(), sign);
    const int n = prob.dim();
    Matrix X(n, n);
    for (int j = 0; j < n; ++j) X.col(j) = ginibre_vector(n, rng);
    X /= X.norm();
    Eigen::VectorXd x;
    prob.pack_x(X, x);
    const auto res = augmented_lagrangian(prob, x, cfg);
    if (full_rank) prob.polish(x);
    const double resid = prob.residual(x);
    const bool ok = res.converged && resid <= cfg.feasibility_tol;
    best.restarts++;
    if (ok) best.restarts_converged++;
    const Matrix Xf = prob.unpack_x(x);
    const Matrix s = Xf * Xf.adjoint();
    const double v = qcore::expect(s, objective.matrix());
    const bool better = !have || (ok && !best.converged) ||
                        (ok == best.converged && (direction == Direction::maximize ? v > best.value : v < best.value));
    if (better) {
      have = true;
      best.value = v;
      best.state = s;
      best.converged = ok;
      best.feasibility_residual = resid;
    }
  }
  return best;
}

double saturating_chain_state(const ProductEnsemble& pair, const models::ModelSpec& spec,
                              const std::vector<int>& coloring) {
  pair.validate();
  if (pair.parties() != 2) throw ValidationError("saturating_chain_state: ensemble must describe a pair");
  if (static_cast<int>(coloring.size()) != spec.n)
    throw qcore::PreconditionError("saturating_chain_state: a two-colouring of every site is required");
  for (const auto& e : spec.edges)
    if (coloring[e.a - 1] == coloring[e.b - 1])
      throw qcore::PreconditionError("saturating_chain_state: colouring is not proper");
  const Matrix h = models::build_hamiltonian(spec).matrix();
  double energy = 0.0;
  for (int k = 0; k < pair.size(); ++k) {
    Vector v = pair.locals[k][coloring[0] == 0 ? 0 : 1];
    for (int n = 1; n < spec.n; ++n) v = qcore::tensor(v, pair.locals[k][coloring[n] == 0 ? 0 : 1]);
    energy += pair.weights[k] * qcore::expect(v, h);
  }
  return energy;
}

double symmetric_extension_value(const std::vector<double>& weights, const std::vector<Vector>& states, int n,
                                 const Observable& h_ab) {
  if (weights.size() != states.size() || weights.empty())
    throw ValidationError("symmetric_extension_value: weights and states differ in length");
  if (n < 2) throw ValidationError("symmetric_extension_value: need at least two parties");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("symmetric_extension_value: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("symmetric_extension_value: weights do not sum to one");
  const auto d = states.front().size();
  if (h_ab.dim() != d * d) throw DimensionError("symmetric_extension_value: pair Hamiltonian has wrong dimension");
  long long dim = 1;
  for (int i = 0; i < n && dim <= models::kMaxDenseDim; ++i) dim *= d;

  double energy = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    const Vector psi = states[k] / states[k].norm();
    if (dim <= models::kMaxDenseDim) {
      // assemble psi^(x n) and sum the pair terms on it
      Vector big = psi;
      for (int i = 1; i < n; ++i) big = qcore::tensor(big, psi);
      double e = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const int sites[2] = {a, b};
          e += big.dot(qcore::apply_local(h_ab.matrix(), sites, n, static_cast<int>(d), big)).real();
        }
      energy += weights[k] * e;
    } else {
      const Vector pp = qcore::tensor(psi, psi);
      energy += weights[k] * 0.5 * n * (n - 1) * qcore::expect(pp, h_ab.matrix());
    }
  }
  return energy;
}

optim::Objective roof_objective(const DensityMatrix& rho, const std::vector<Observable>& hs, Direction direction,
                                int ensemble_size) {
  const int d = static_cast<int>(rho.dim());
  const auto prob = std::make_shared<RoofProblem>(rho, hs, ensemble_size > 0 ? ensemble_size : d * d,
                                                  direction == Direction::maximize ? -1.0 : 1.0);
  return [prob](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return (*prob)(x, g); };
}

optim::Objective coupling_objective(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                                    Direction direction, int ensemble_size) {
  check_pair(rho, sigma, objective);
  const int d = static_cast<int>(rho.dim());
  const auto prob =
      std::make_shared<CoupleProblem>(rho.matrix(), sigma.matrix(), objective.matrix(),
                                      ensemble_size > 0 ? ensemble_size : d * d * d * d,
                                      direction == Direction::maximize ? -1.0 : 1.0);
  return [prob](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return (*prob)(x, g); };
}

nlohmann::json ensemble_to_json(const ProductEnsemble& e) {
  nlohmann::json locals = nlohmann::json::array();
  for (const auto& comp : e.locals) {
    nlohmann::json parties = nlohmann::json::array();
    for (const auto& v : comp) {
      nlohmann::json vec = nlohmann::json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) vec.push_back({v(i).real(), v(i).imag()});
      parties.push_back(vec);
    }
    locals.push_back(parties);
  }
  return {{"weights", e.weights}, {"locals", locals}};
}

ProductEnsemble ensemble_from_json(const nlohmann::json& j) {
  try {
    ProductEnsemble e;
    e.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& comp : j.at("locals")) {
      std::vector<Vector> parties;
      for (const auto& vec : comp) {
        Vector v(static_cast<Eigen::Index>(vec.size()));
        for (size_t i = 0; i < vec.size(); ++i) v(i) = Complex(vec[i].at(0).get<double>(), vec[i].at(1).get<double>());
        parties.push_back(v);
      }
      e.locals.push_back(parties);
    }
    e.validate();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("ensemble JSON: ") + ex.what());
  }
}

}  // namespace spinbound::oracles
