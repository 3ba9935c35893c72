#include "spinbound/random.hpp"

namespace spinbound {

using qcore::Complex;
using qcore::Matrix;
using qcore::Vector;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over a combination of both inputs
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
Matrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}
}  // namespace

Vector random_pure_state(int d, Rng& rng) {
  Vector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

qcore::DensityMatrix random_density(int d, Rng& rng, int rank) {
  const int r = rank > 0 ? rank : d;
  Matrix g = ginibre(d, r, rng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return qcore::DensityMatrix(0.5 * (m + m.adjoint()));
}

Matrix random_hermitian(int d, Rng& rng, double scale) {
  Matrix g = ginibre(d, d, rng);
  return scale * 0.5 * (g + g.adjoint());
}

Matrix random_unitary(int d, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, d, rng));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR();
  // fix column phases so the distribution is Haar
  for (int i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    if (std::abs(diag) > 0.0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

}  // namespace spinbound
