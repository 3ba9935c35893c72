#include "spinbound/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinbound::qcore {

namespace {

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw ValidationError(std::string(what) + ": matrix must be square and non-empty");
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entry");
}

struct PartyLayout {
  Eigen::Index kept_dim = 1;
  Eigen::Index traced_dim = 1;
  // full index of (kept k, traced t) stored at t * kept_dim + k
  std::vector<Eigen::Index> index;
};

PartyLayout layout(Eigen::Index total, std::span<const int> dims, std::span<const int> keep) {
  const int n = static_cast<int>(dims.size());
  Eigen::Index prod = 1;
  for (int dm : dims) {
    if (dm < 1) throw DimensionError("partial_trace: party dimension must be positive");
    prod *= dm;
  }
  if (prod != total) throw DimensionError("partial_trace: product of dims does not match matrix dimension");
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DimensionError("partial_trace: kept party out of range");
    if (kept[k]) throw DimensionError("partial_trace: duplicate kept party");
    kept[k] = true;
  }
  PartyLayout out;
  std::vector<Eigen::Index> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
  std::vector<Eigen::Index> kstride(n, 0), tstride(n, 0);
  Eigen::Index ks = 1, ts = 1;
  for (int i = n - 1; i >= 0; --i) {
    if (kept[i]) {
      kstride[i] = ks;
      ks *= dims[i];
    } else {
      tstride[i] = ts;
      ts *= dims[i];
    }
  }
  out.kept_dim = ks;
  out.traced_dim = ts;
  out.index.assign(static_cast<size_t>(total), 0);
  std::vector<int> digit(n, 0);
  for (Eigen::Index full = 0; full < total; ++full) {
    Eigen::Index k = 0, t = 0;
    for (int i = 0; i < n; ++i) {
      k += digit[i] * kstride[i];
      t += digit[i] * tstride[i];
    }
    out.index[static_cast<size_t>(t * ks + k)] = full;
    for (int i = n - 1; i >= 0; --i) {
      if (++digit[i] < dims[i]) break;
      digit[i] = 0;
    }
  }
  return out;
}

// Offsets of an operator's basis states on `sites`, plus the bases of the
// complementary register (all digits on `sites` zero).
struct Embedding {
  std::vector<Eigen::Index> offset;
  std::vector<Eigen::Index> base;
};

Embedding embedding(Eigen::Index op_dim, std::span<const int> sites, int parties, int d) {
  if (parties < 1 || d < 2) throw DimensionError("embed: invalid register");
  const int m = static_cast<int>(sites.size());
  Eigen::Index expect_dim = 1;
  for (int i = 0; i < m; ++i) expect_dim *= d;
  if (expect_dim != op_dim) throw DimensionError("embed: operator dimension does not match site count");
  std::vector<bool> used(parties, false);
  for (int s : sites) {
    if (s < 0 || s >= parties || used[s]) throw DimensionError("embed: invalid site list");
    used[s] = true;
  }
  std::vector<Eigen::Index> stride(parties, 1);
  for (int i = parties - 2; i >= 0; --i) stride[i] = stride[i + 1] * d;
  Embedding e;
  e.offset.resize(static_cast<size_t>(op_dim));
  for (Eigen::Index a = 0; a < op_dim; ++a) {
    Eigen::Index rem = a, off = 0;
    for (int i = m - 1; i >= 0; --i) {
      off += (rem % d) * stride[sites[i]];
      rem /= d;
    }
    e.offset[static_cast<size_t>(a)] = off;
  }
  std::vector<int> rest;
  for (int i = 0; i < parties; ++i)
    if (!used[i]) rest.push_back(i);
  Eigen::Index nbase = 1;
  for (size_t i = 0; i < rest.size(); ++i) nbase *= d;
  e.base.resize(static_cast<size_t>(nbase));
  for (Eigen::Index b = 0; b < nbase; ++b) {
    Eigen::Index rem = b, off = 0;
    for (int i = static_cast<int>(rest.size()) - 1; i >= 0; --i) {
      off += (rem % d) * stride[rest[i]];
      rem /= d;
    }
    e.base[static_cast<size_t>(b)] = off;
  }
  return e;
}

}  // namespace

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_error(const Matrix& m) { return max_abs(m - m.adjoint()); }

Observable::Observable(Matrix m) : m_(std::move(m)) {
  require_square_finite(m_, "Observable");
  if (hermiticity_error(m_) > kHermitianTol) throw ValidationError("Observable: matrix is not Hermitian");
}

Observable Observable::operator+(const Observable& o) const {
  if (o.dim() != dim()) throw DimensionError("Observable sum: dimension mismatch");
  return Observable(m_ + o.m_);
}
Observable Observable::operator-(const Observable& o) const {
  if (o.dim() != dim()) throw DimensionError("Observable difference: dimension mismatch");
  return Observable(m_ - o.m_);
}
Observable Observable::operator*(double s) const { return Observable(m_ * s); }

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  require_square_finite(m_, "DensityMatrix");
  if (hermiticity_error(m_) > kHermitianTol) throw ValidationError("DensityMatrix: matrix is not Hermitian");
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTol)
    throw NotAStateError("DensityMatrix: trace differs from 1");
  Matrix h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) throw NotAStateError("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double nrm = psi.norm();
  if (psi.size() == 0 || !(nrm > 0.0)) throw ValidationError("pure: zero vector");
  if (std::abs(nrm - 1.0) > kTraceTol) throw ValidationError("pure: vector is not normalized");
  Vector v = psi / nrm;
  return DensityMatrix(v * v.adjoint(), Trusted{});
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  if (d < 1) throw ValidationError("maximally_mixed: dimension must be positive");
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), Trusted{});
}

DensityMatrix DensityMatrix::from_bloch(double x, double y, double z) {
  const auto p = pauli();
  Matrix m = 0.5 * (Matrix::Identity(2, 2) + x * p[0].matrix() + y * p[1].matrix() + z * p[2].matrix());
  return DensityMatrix(std::move(m));
}

Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Observable tensor(const Observable& a, const Observable& b) { return Observable(tensor(a.matrix(), b.matrix())); }

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.matrix(), b.matrix()), DensityMatrix::Trusted{});
}

Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix partial_trace(const Matrix& m, std::span<const int> dims, std::span<const int> keep) {
  if (m.rows() != m.cols()) throw DimensionError("partial_trace: matrix must be square");
  const PartyLayout pl = layout(m.rows(), dims, keep);
  const Eigen::Index K = pl.kept_dim;
  Matrix out = Matrix::Zero(K, K);
  for (Eigen::Index t = 0; t < pl.traced_dim; ++t) {
    const Eigen::Index* idx = pl.index.data() + t * K;
    for (Eigen::Index b = 0; b < K; ++b)
      for (Eigen::Index a = 0; a < K; ++a) out(a, b) += m(idx[a], idx[b]);
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::span<const int> keep) {
  return DensityMatrix(partial_trace(rho.matrix(), dims, keep), DensityMatrix::Trusted{});
}

DensityMatrix reduced_state(const Vector& psi, std::span<const int> dims, std::span<const int> keep) {
  const PartyLayout pl = layout(psi.size(), dims, keep);
  Matrix amp(pl.kept_dim, pl.traced_dim);
  for (Eigen::Index t = 0; t < pl.traced_dim; ++t)
    for (Eigen::Index k = 0; k < pl.kept_dim; ++k) amp(k, t) = psi(pl.index[static_cast<size_t>(t * pl.kept_dim + k)]);
  Matrix r = amp * amp.adjoint();
  r /= r.trace().real();
  return DensityMatrix(0.5 * (r + r.adjoint()), DensityMatrix::Trusted{});
}

void add_embedded(Matrix& target, const Matrix& op, std::span<const int> sites, int parties, int d, double scale) {
  const Embedding e = embedding(op.rows(), sites, parties, d);
  Eigen::Index total = 1;
  for (int i = 0; i < parties; ++i) total *= d;
  if (target.rows() != total || target.cols() != total) throw DimensionError("add_embedded: target dimension mismatch");
  for (Eigen::Index b = 0; b < op.cols(); ++b)
    for (Eigen::Index a = 0; a < op.rows(); ++a) {
      const Complex v = scale * op(a, b);
      if (v == Complex(0.0, 0.0)) continue;
      const Eigen::Index oa = e.offset[static_cast<size_t>(a)], ob = e.offset[static_cast<size_t>(b)];
      for (Eigen::Index base : e.base) target(base + oa, base + ob) += v;
    }
}

Matrix embed(const Matrix& op, std::span<const int> sites, int parties, int d) {
  Eigen::Index total = 1;
  for (int i = 0; i < parties; ++i) total *= d;
  Matrix out = Matrix::Zero(total, total);
  add_embedded(out, op, sites, parties, d, 1.0);
  return out;
}

Vector apply_local(const Matrix& op, std::span<const int> sites, int parties, int d, const Vector& x) {
  const Embedding e = embedding(op.rows(), sites, parties, d);
  Vector y = Vector::Zero(x.size());
  const Eigen::Index m = op.rows();
  for (Eigen::Index base : e.base)
    for (Eigen::Index a = 0; a < m; ++a) {
      Complex acc = 0.0;
      for (Eigen::Index b = 0; b < m; ++b) acc += op(a, b) * x(base + e.offset[static_cast<size_t>(b)]);
      y(base + e.offset[static_cast<size_t>(a)]) = acc;
    }
  return y;
}

EigenDecomposition eig_hermitian(const Matrix& m) {
  require_square_finite(m, "eig_hermitian");
  if (hermiticity_error(m) > kHermitianTol) throw ValidationError("eig_hermitian: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw NonConvergenceError("eig_hermitian: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition eig_hermitian(const Observable& m) { return eig_hermitian(m.matrix()); }

std::vector<Observable> pauli() {
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  return {Observable(x), Observable(y), Observable(z)};
}

std::vector<Observable> spin_matrices(double j) {
  const double twice = 2.0 * j + 1.0;
  if (!(j > 0.0) || std::abs(twice - std::round(twice)) > 1e-12)
    throw ValidationError("spin_matrices: 2j+1 must be an integer greater than 1");
  const int n = static_cast<int>(std::lround(twice));
  Matrix jp = Matrix::Zero(n, n), jz = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = j - i;
    jz(i, i) = m;
    if (i > 0) jp(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  Matrix jm = jp.adjoint();
  Matrix jx = 0.5 * (jp + jm);
  Matrix jy = (jp - jm) / Complex(0.0, 2.0);
  return {Observable(jx), Observable(jy), Observable(jz)};
}

std::vector<Observable> gellmann(int d) {
  if (d < 2) throw ValidationError("gellmann: dimension must be at least 2");
  std::vector<Observable> out;
  out.reserve(static_cast<size_t>(d * d - 1));
  for (int k = 1; k < d; ++k) {
    for (int j = 0; j < k; ++j) {
      Matrix s = Matrix::Zero(d, d), a = Matrix::Zero(d, d);
      s(j, k) = s(k, j) = 1.0;
      a(j, k) = Complex(0, -1);
      a(k, j) = Complex(0, 1);
      out.emplace_back(s);
      out.emplace_back(a);
    }
    Matrix g = Matrix::Zero(d, d);
    const double c = std::sqrt(2.0 / (k * (k + 1.0)));
    for (int j = 0; j < k; ++j) g(j, j) = c;
    g(k, k) = -c * k;
    out.emplace_back(g);
  }
  return out;
}

std::vector<Observable> operator_library(OperatorKind kind, double param) {
  switch (kind) {
    case OperatorKind::pauli:
      return pauli();
    case OperatorKind::spin_j:
      return spin_matrices(param);
    case OperatorKind::gellmann: {
      if (std::abs(param - std::round(param)) > 1e-12) throw ValidationError("gellmann: dimension must be an integer");
      return gellmann(static_cast<int>(std::lround(param)));
    }
  }
  throw ValidationError("operator_library: unknown kind");
}

Observable flip_operator(int d) {
  if (d < 2) throw ValidationError("flip_operator: dimension must be at least 2");
  Matrix f = Matrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) f(b * d + a, a * d + b) = 1.0;
  return Observable(f);
}

Matrix psd_sqrt(const Matrix& m) {
  const EigenDecomposition e = eig_hermitian(m);
  if (e.values.size() > 0 && e.values.minCoeff() < -kNotAStateTol)
    throw NotAStateError("psd_sqrt: matrix has a negative eigenvalue");
  RealVector s = e.values.unaryExpr([](double v) { return v < kClipTol ? 0.0 : std::sqrt(v); });
  return e.vectors * s.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

Matrix matrix_sqrt_psd(const DensityMatrix& rho) { return psd_sqrt(rho.matrix()); }

double expect(const Matrix& rho, const Matrix& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols()) throw DimensionError("expect: dimension mismatch");
  // Tr(rho op) without forming the product
  return (rho.transpose().cwiseProduct(op)).sum().real();
}

double expect(const DensityMatrix& rho, const Observable& op) { return expect(rho.matrix(), op.matrix()); }

double expect(const Vector& psi, const Matrix& op) {
  if (psi.size() != op.rows()) throw DimensionError("expect: dimension mismatch");
  return psi.dot(op * psi).real();
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array(), c = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return {{"dim", m.rows()}, {"re", re}, {"im", im}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re"))
    throw ValidationError("matrix JSON: expected object with dim, re and im");
  const auto n = j.at("dim").get<long long>();
  if (n < 1) throw ValidationError("matrix JSON: dim must be positive");
  const auto& re = j.at("re");
  const bool has_im = j.contains("im");
  if (!re.is_array() || static_cast<long long>(re.size()) != n)
    throw ValidationError("matrix JSON: re must have dim rows");
  Matrix m(n, n);
  for (long long r = 0; r < n; ++r) {
    if (!re[r].is_array() || static_cast<long long>(re[r].size()) != n)
      throw ValidationError("matrix JSON: row length mismatch");
    for (long long c = 0; c < n; ++c) {
      double imv = 0.0;
      if (has_im) {
        const auto& row = j.at("im").at(r);
        if (static_cast<long long>(row.size()) != n) throw ValidationError("matrix JSON: row length mismatch");
        imv = row.at(c).get<double>();
      }
      m(r, c) = Complex(re[r][c].get<double>(), imv);
    }
  }
  return m;
}

}  // namespace spinbound::qcore
