#include "spinbound/infomeasures.hpp"

#include <cmath>

namespace spinbound::info {

using qcore::Complex;
using qcore::DimensionError;
using qcore::Matrix;
using qcore::NotAStateError;
using qcore::ValidationError;

namespace {

void same_dim(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) throw DimensionError("state and observable dimensions differ");
}

void check_list(const DensityMatrix& rho, const std::vector<Observable>& hs) {
  if (hs.empty()) throw ValidationError("observable list is empty");
  for (const auto& h : hs) same_dim(rho, h);
}

double mean_sq(const DensityMatrix& rho, const Observable& h) {
  return qcore::expect(rho.matrix(), h.matrix() * h.matrix());
}

}  // namespace

const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::exact:
      return "exact";
    case Exactness::upper_bound:
      return "upper_bound";
    case Exactness::lower_bound:
      return "lower_bound";
  }
  return "unknown";
}

double variance(const DensityMatrix& rho, const Observable& h) {
  same_dim(rho, h);
  const double m = qcore::expect(rho, h);
  return std::max(0.0, mean_sq(rho, h) - m * m);
}

double qfi(const qcore::EigenDecomposition& e, const Observable& h) {
  if (e.vectors.rows() != h.dim()) throw DimensionError("qfi: dimension mismatch");
  if (e.values.minCoeff() < -qcore::kNotAStateTol) throw NotAStateError("qfi: negative eigenvalue");
  const Matrix hk = e.vectors.adjoint() * h.matrix() * e.vectors;
  const Eigen::Index n = e.values.size();
  double f = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) {
      const double lk = std::max(e.values(k), 0.0), ll = std::max(e.values(l), 0.0);
      const double s = lk + ll;
      if (s < qcore::kClipTol) continue;
      const double dl = lk - ll;
      f += dl * dl / s * std::norm(hk(k, l));
    }
  return 2.0 * f;
}

double qfi(const DensityMatrix& rho, const Observable& h) {
  same_dim(rho, h);
  return qfi(qcore::eig_hermitian(rho.matrix()), h);
}

double wy_skew(const DensityMatrix& rho, const Observable& h) {
  same_dim(rho, h);
  const Matrix s = qcore::matrix_sqrt_psd(rho);
  const Matrix& hm = h.matrix();
  const double cross = (hm * s * hm * s).trace().real();
  return mean_sq(rho, h) - cross;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("fidelity: dimension mismatch");
  const Matrix s = qcore::matrix_sqrt_psd(rho);
  const Matrix inner = s * sigma.matrix() * s;
  const auto e = qcore::eig_hermitian(0.5 * (inner + inner.adjoint()));
  double t = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > qcore::kClipTol) t += std::sqrt(e.values(i));
  return std::min(1.0, t * t);
}

RoofValue sep_corr_max(const DensityMatrix& rho, const std::vector<Observable>& hs) {
  check_list(rho, hs);
  const auto e = qcore::eig_hermitian(rho.matrix());
  double v = 0.0;
  for (const auto& h : hs) v += mean_sq(rho, h) - qfi(e, h) / 4.0;
  return {v, hs.size() == 1 ? Exactness::exact : Exactness::upper_bound};
}

double any_state_corr_max_qubit(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != 2) throw qcore::UnsupportedError("any_state_corr_max_qubit: only qubits are supported");
  same_dim(rho, h);
  return mean_sq(rho, h) - wy_skew(rho, h);
}

double sep_corr_max_heisenberg(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != 2 || sigma.dim() != 2)
    throw qcore::UnsupportedError("sep_corr_max_heisenberg: only qubits are supported");
  return fidelity(rho, sigma) / 2.0 - 0.25;
}

RoofValue sym_sep_corr_min(const DensityMatrix& rho, const std::vector<Observable>& hs, TwoPartySet set) {
  check_list(rho, hs);
  double v = 0.0;
  for (const auto& h : hs) {
    const double m = qcore::expect(rho, h);
    v += m * m;
  }
  if (set == TwoPartySet::sep) return {v, Exactness::upper_bound};
  return {v, hs.size() <= 2 ? Exactness::exact : Exactness::lower_bound};
}

}  // namespace spinbound::info
