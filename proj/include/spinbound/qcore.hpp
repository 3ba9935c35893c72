#pragma once

// Dense complex linear algebra and quantum primitives shared by every module.
//
// Conventions: party 0 is the slowest-varying index of a tensor product, and
// |0> is the +1 eigenvector of sigma_z.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spinbound::qcore {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kClipTol = 1e-12;
inline constexpr double kNotAStateTol = 1e-8;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class NotAStateError : public Error {
 public:
  using Error::Error;
};
class UnsupportedError : public Error {
 public:
  using Error::Error;
};
class PreconditionError : public Error {
 public:
  using Error::Error;
};
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Hermitian operator on a finite-dimensional space.
class Observable {
 public:
  /// Throws ValidationError if `m` is not square, has non-finite entries,
  /// or deviates from Hermitian by more than kHermitianTol.
  explicit Observable(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

  Observable operator+(const Observable& o) const;
  Observable operator-(const Observable& o) const;
  Observable operator*(double s) const;

 private:
  Matrix m_;
};

/// Hermitian, positive-semidefinite, unit-trace matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(int d);
  /// Qubit state (I + r.sigma)/2.
  static DensityMatrix from_bloch(double x, double y, double z);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  struct Trusted {};
  DensityMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  friend DensityMatrix tensor(const DensityMatrix&, const DensityMatrix&);
  friend DensityMatrix partial_trace(const DensityMatrix&, std::span<const int>,
                                     std::span<const int>);
  friend DensityMatrix reduced_state(const Vector&, std::span<const int>,
                                     std::span<const int>);
  Matrix m_;
};

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

Matrix tensor(const Matrix& a, const Matrix& b);
Observable tensor(const Observable& a, const Observable& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
Vector tensor(const Vector& a, const Vector& b);

Matrix identity(Eigen::Index d);

/// Reduced matrix on the parties in `keep` (any order; output follows
/// ascending party index). Throws DimensionError on mismatched dims.
Matrix partial_trace(const Matrix& m, std::span<const int> dims,
                     std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep);
/// Reduced state of the pure state |psi><psi| without forming the projector.
DensityMatrix reduced_state(const Vector& psi, std::span<const int> dims,
                            std::span<const int> keep);

/// Accumulate scale * op acting on `sites` (op's first factor on sites[0])
/// into `target`, an operator on `parties` sites of local dimension `d`.
void add_embedded(Matrix& target, const Matrix& op, std::span<const int> sites,
                  int parties, int d, double scale = 1.0);
Matrix embed(const Matrix& op, std::span<const int> sites, int parties, int d);

/// y = op acting on `sites` applied to x (same conventions as add_embedded).
Vector apply_local(const Matrix& op, std::span<const int> sites, int parties,
                   int d, const Vector& x);

EigenDecomposition eig_hermitian(const Observable& m);
EigenDecomposition eig_hermitian(const Matrix& m);

std::vector<Observable> pauli();
/// Angular momentum matrices {j_x, j_y, j_z} in the basis m = j, j-1, ..., -j.
std::vector<Observable> spin_matrices(double j);
/// d^2-1 generalized Gell-Mann matrices with Tr(g_a g_b) = 2 delta_ab.
/// For d = 2 this is {sigma_x, sigma_y, sigma_z}.
std::vector<Observable> gellmann(int d);

enum class OperatorKind { pauli, spin_j, gellmann };
/// `param` is j for spin_j, d for gellmann, ignored for pauli.
std::vector<Observable> operator_library(OperatorKind kind, double param = 0.0);

Observable flip_operator(int d);

Matrix matrix_sqrt_psd(const DensityMatrix& rho);
/// Square root of a PSD matrix; eigenvalues below kClipTol are set to zero.
/// Throws NotAStateError if an eigenvalue is below -kNotAStateTol.
Matrix psd_sqrt(const Matrix& m);

double expect(const DensityMatrix& rho, const Observable& op);
double expect(const Matrix& rho, const Matrix& op);
double expect(const Vector& psi, const Matrix& op);

double max_abs(const Matrix& m);
double hermiticity_error(const Matrix& m);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace spinbound::qcore
