#include "spinbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "spinbound/optim.hpp"

namespace spinbound::bounds {

using qcore::Complex;
using qcore::DimensionError;
using qcore::PreconditionError;
using qcore::UnsupportedError;
using qcore::ValidationError;

namespace {

constexpr double kViolationTol = 1e-12;

double mean_sq(const DensityMatrix& rho, const Observable& h) {
  return qcore::expect(rho.matrix(), h.matrix() * h.matrix());
}

std::vector<double> padded(const std::vector<double>& field, size_t n) {
  if (field.size() > n) throw DimensionError("field has more components than generators");
  std::vector<double> b = field;
  b.resize(n, 0.0);
  return b;
}

double dot_field(const DensityMatrix& rho, const std::vector<double>& field, const std::vector<Observable>& gens) {
  const auto b = padded(field, gens.size());
  double v = 0.0;
  for (size_t l = 0; l < gens.size(); ++l) {
    if (gens[l].dim() != rho.dim()) throw DimensionError("generator dimension differs from state");
    v += b[l] * qcore::expect(rho, gens[l]);
  }
  return v;
}

std::array<double, 3> bloch(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw UnsupportedError("only qubit states are supported here");
  const auto p = qcore::pauli();
  return {qcore::expect(rho, p[0]), qcore::expect(rho, p[1]), qcore::expect(rho, p[2])};
}

bool is_complete_graph(const models::ModelSpec& spec) {
  if (spec.pair_count() != spec.n * (spec.n - 1) / 2) return false;
  std::vector<std::vector<bool>> seen(spec.n, std::vector<bool>(spec.n, false));
  for (const auto& e : spec.edges) {
    const int a = std::min(e.a, e.b) - 1, b = std::max(e.a, e.b) - 1;
    if (seen[a][b]) return false;
    seen[a][b] = true;
  }
  return true;
}

std::pair<DensityMatrix, DensityMatrix> pair_marginals(const DensityMatrix& rho_ab) {
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho_ab.dim()))));
  if (d * d != rho_ab.dim()) throw DimensionError("two-party state must have square dimension");
  const int dims[2] = {d, d};
  const int a[1] = {0}, b[1] = {1};
  return {qcore::partial_trace(rho_ab, dims, a), qcore::partial_trace(rho_ab, dims, b)};
}

}  // namespace

// ---------------------------------------------------------------------------

SepEnergy e_sep_lower(const models::ModelSpec& spec, const DensityMatrix& rho, TwoPartySet set,
                      const std::optional<oracles::OptimizerConfig>& oracle) {
  spec.validate();
  if (spec.pair_count() == 0) throw ValidationError("e_sep_lower: model has no interacting pairs");
  if (rho.dim() != spec.d) throw DimensionError("e_sep_lower: marginal dimension differs from model");
  const double np = spec.pair_count();
  const double field_part = -spec.n * dot_field(rho, spec.field, spec.generator_set());

  std::vector<const models::CouplingTerm*> active;
  for (const auto& t : spec.terms)
    if (t.coupling != 0.0) active.push_back(&t);
  const bool any_positive =
      std::any_of(active.begin(), active.end(), [](const auto* t) { return t->coupling > 0.0; });

  SepEnergy out;
  double corr = 0.0;
  if (set == TwoPartySet::sep && any_positive) {
    if (!oracle) throw UnsupportedError("e_sep_lower: antiferromagnetic couplings over separable states need the oracle");
    const int d = spec.d;
    Matrix obj = Matrix::Zero(d * d, d * d);
    for (const auto* t : active) obj += t->coupling * qcore::tensor(t->op.matrix(), t->op.matrix());
    const auto res = oracles::sep_couple_opt(rho, rho, Observable(obj), oracles::Direction::minimize, *oracle);
    if (!res.converged) throw qcore::NonConvergenceError("e_sep_lower: coupling oracle did not converge");
    corr = res.value;
    out.exactness = Exactness::upper_bound;
    out.method = "oracle";
  } else {
    const auto e = qcore::eig_hermitian(rho.matrix());
    for (const auto* t : active) {
      if (t->coupling < 0.0) {
        corr += t->coupling * (mean_sq(rho, t->op) - info::qfi(e, t->op) / 4.0);
      } else {
        const double m = qcore::expect(rho, t->op);
        corr += t->coupling * m * m;
      }
    }
    bool exact = active.size() <= 1;
    if (!exact && set == TwoPartySet::symsep && active.size() <= 2) {
      exact = std::all_of(active.begin(), active.end(), [&](const auto* t) {
        return t->coupling > 0.0 && t->coupling == active.front()->coupling;
      });
    }
    out.exactness = exact ? Exactness::exact : Exactness::lower_bound;
    out.method = "closed_form";
  }
  out.value = np * corr + field_part;

  const bool graph_ok = set == TwoPartySet::sep ? models::two_coloring(spec.n, spec.edges).has_value()
                                                : is_complete_graph(spec);
  const bool field_ok = !spec.has_field() || models::is_regular(spec.n, spec.edges);
  out.saturated = out.exactness == Exactness::exact && graph_ok && field_ok;
  return out;
}

// ---------------------------------------------------------------------------

double FerroChain::field_expectation(const DensityMatrix& rho) const { return dot_field(rho, field, generators); }

Matrix FerroChain::field_operator() const {
  const auto b = padded(field, generators.size());
  Matrix f = Matrix::Zero(h.dim(), h.dim());
  for (size_t l = 0; l < generators.size(); ++l) f += b[l] * generators[l].matrix();
  return f;
}

FerroChain ising_chain(int n, double J, double bx) {
  FerroChain c;
  c.n = n;
  c.J = J;
  c.field = {bx, 0.0, 0.0};
  return c;
}

namespace {
void check_chain(const DensityMatrix& rho, const FerroChain& c) {
  if (c.n < 2) throw ValidationError("chain: need at least two particles");
  if (rho.dim() != c.h.dim()) throw DimensionError("chain: marginal dimension differs from h");
}
}  // namespace

double e_sep_chain(const DensityMatrix& rho, const FerroChain& c) {
  check_chain(rho, c);
  if (c.n % 2 != 0) throw PreconditionError("e_sep_chain: the chain length must be even");
  if (!(c.J > 0.0)) throw PreconditionError("e_sep_chain: the coupling must be ferromagnetic (J > 0)");
  return -c.n * c.J * (mean_sq(rho, c.h) - info::qfi(rho, c.h) / 4.0) - c.n * c.field_expectation(rho);
}

double e_lower_wy(const DensityMatrix& rho, const FerroChain& c) {
  check_chain(rho, c);
  if (rho.dim() != 2) throw UnsupportedError("e_lower_wy: only qubits are supported");
  return -c.n * c.J * (mean_sq(rho, c.h) - info::wy_skew(rho, c.h)) - c.n * c.field_expectation(rho);
}

Matrix chain_block_hamiltonian(const FerroChain& c, int k) {
  if (k < 1) throw ValidationError("block Hamiltonian: k must be positive");
  const int d = static_cast<int>(c.h.dim());
  long long dim = 1;
  for (int i = 0; i < k; ++i) {
    dim *= d;
    if (dim > models::kMaxDenseDim) throw DimensionError("block Hamiltonian exceeds dense limit of 4096");
  }
  Matrix h = Matrix::Zero(dim, dim);
  if (k == 1) return h;
  const Matrix hh = qcore::tensor(c.h.matrix(), c.h.matrix());
  for (int n = 0; n + 1 < k; ++n) {
    const int sites[2] = {n, n + 1};
    qcore::add_embedded(h, hh, sites, k, d, -c.J);
  }
  const Matrix f = c.field_operator();
  for (int n = 0; n < k; ++n) {
    const int site[1] = {n};
    const double w = (n == 0 || n == k - 1) ? 0.5 : 1.0;
    qcore::add_embedded(h, f, site, k, d, -w);
  }
  return h;
}

ConstrainedMin marginal_constrained_min(const Matrix& h, const DensityMatrix& rho, int k) {
  if (k < 1) throw ValidationError("constrained minimum: k must be positive");
  const int d = static_cast<int>(rho.dim());
  long long dim = 1;
  for (int i = 0; i < k; ++i) dim *= d;
  if (h.rows() != dim || h.cols() != dim) throw DimensionError("constrained minimum: Hamiltonian dimension mismatch");
  ConstrainedMin out;
  if (k == 1) {
    out.value = out.primal = qcore::expect(rho.matrix(), h);
    out.converged = true;
    return out;
  }

  // every admissible state lives on the k-fold tensor power of supp(rho)
  const auto e = qcore::eig_hermitian(rho.matrix());
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (e.values(i) > 1e-10) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  Matrix V(d, r);
  Matrix rr = Matrix::Zero(r, r);
  double tr = 0.0;
  for (int i = 0; i < r; ++i) {
    V.col(i) = e.vectors.col(keep[i]);
    rr(i, i) = e.values(keep[i]);
    tr += e.values(keep[i]);
  }
  rr /= tr;
  Matrix Vk = V;
  for (int i = 1; i < k; ++i) Vk = qcore::tensor(Vk, V);
  const Matrix hr = Vk.adjoint() * h * Vk;
  if (r == 1) {
    out.value = out.primal = hr(0, 0).real();
    out.converged = true;
    return out;
  }

  const auto gens = qcore::gellmann(r);
  std::vector<Matrix> ops;
  std::vector<double> target;
  for (int n = 0; n < k; ++n)
    for (const auto& g : gens) {
      const int site[1] = {n};
      ops.push_back(qcore::embed(g.matrix(), site, k, r));
      target.push_back(qcore::expect(rr, g.matrix()));
    }
  const int m = static_cast<int>(ops.size());
  const double scale = std::max(1.0, qcore::max_abs(hr));

  Matrix gibbs;
  // Negative smoothed dual: T log Tr exp(-(H - sum c O)/T) - sum c t.
  auto evaluate = [&](const Eigen::VectorXd& c, double T, Eigen::VectorXd* grad, Matrix* state) {
    Matrix M = hr;
    for (int i = 0; i < m; ++i) M -= c(i) * ops[i];
    const auto es = qcore::eig_hermitian(0.5 * (M + M.adjoint()));
    const double lmin = es.values(0);
    double lin = 0.0;
    for (int i = 0; i < m; ++i) lin += c(i) * target[i];
    if (T <= 0.0) return -(lmin + lin);
    Eigen::VectorXd w = (-(es.values.array() - lmin) / T).exp();
    const double Z = w.sum();
    const double soft = lmin - T * std::log(Z);
    if (grad || state) {
      Matrix s = es.vectors * (w / Z).cast<Complex>().asDiagonal() * es.vectors.adjoint();
      if (grad) {
        grad->resize(m);
        for (int i = 0; i < m; ++i) (*grad)(i) = qcore::expect(s, ops[i]) - target[i];
      }
      if (state) *state = std::move(s);
    }
    return -(soft + lin);
  };

  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  bool converged = true;
  for (double T = 0.1 * scale; T > 1e-9 * scale; T /= 10.0) {
    const optim::Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return evaluate(x, T, g, nullptr); };
    optim::Options o;
    o.max_iterations = 2000;
    o.function_tolerance = 1e-15;
    o.gradient_tolerance = 1e-13;
    o.accept_gradient = 1e-7;
    const auto res = optim::minimize(f, c, o);
    converged = res.converged;
    evaluate(c, T, nullptr, &gibbs);
  }
  out.value = -evaluate(c, 0.0, nullptr, nullptr);
  out.primal = qcore::expect(gibbs, hr);
  std::vector<int> dims(k, r);
  double resid = 0.0;
  for (int n = 0; n < k; ++n) {
    const int keep1[1] = {n};
    resid = std::max(resid, qcore::max_abs(qcore::partial_trace(gibbs, dims, keep1) - rr));
  }
  out.residual = resid;
  out.converged = converged;
  return out;
}

namespace {
void check_k(int k, const FerroChain& c) {
  if (k < 1) throw ValidationError("k must be positive");
  if (c.n % k != 0) throw PreconditionError("k must divide the particle count");
}
}  // namespace

double kprod_bound(const DensityMatrix& rho, int k, const FerroChain& c, KprodMode mode) {
  check_chain(rho, c);
  check_k(k, c);
  const double blocks = static_cast<double>(c.n) / k;
  const double block_min = marginal_constrained_min(chain_block_hamiltonian(c, k), rho, k).value;
  double pair = 0.0;
  switch (mode) {
    case KprodMode::single_marginal:
      pair = mean_sq(rho, c.h) - info::qfi(rho, c.h) / 4.0;
      break;
    case KprodMode::product_blocks: {
      const double m = qcore::expect(rho, c.h);
      pair = m * m;
      break;
    }
    case KprodMode::wy_blocks:
      if (rho.dim() != 2) throw UnsupportedError("kprod_bound: the skew-information variant needs qubits");
      pair = mean_sq(rho, c.h) - info::wy_skew(rho, c.h);
      break;
  }
  return blocks * block_min - blocks * c.J * pair - blocks * c.field_expectation(rho);
}

double kprod_bound_block_state(const DensityMatrix& block, int k, const FerroChain& c) {
  check_k(k, c);
  const int d = static_cast<int>(c.h.dim());
  std::vector<int> dims(k, d);
  long long dim = 1;
  for (int i = 0; i < k; ++i) dim *= d;
  if (block.dim() != dim) throw DimensionError("kprod_bound_block_state: block state has wrong dimension");
  const int first[1] = {0};
  const DensityMatrix rho = qcore::partial_trace(block, dims, first);
  const Observable h1(qcore::embed(c.h.matrix(), first, k, d));
  const double blocks = static_cast<double>(c.n) / k;
  const double e_block = qcore::expect(block.matrix(), chain_block_hamiltonian(c, k));
  return blocks * e_block - blocks * c.J * (mean_sq(rho, c.h) - info::qfi(block, h1) / 4.0) -
         blocks * c.field_expectation(rho);
}

double e_lower_kblock(const DensityMatrix& rho, int k, const FerroChain& c) {
  check_chain(rho, c);
  if (k < 2) throw ValidationError("e_lower_kblock: k must be at least 2");
  if (c.n % (k - 1) != 0) throw PreconditionError("e_lower_kblock: k-1 must divide the particle count");
  const double groups = static_cast<double>(c.n) / (k - 1);
  return groups * marginal_constrained_min(chain_block_hamiltonian(c, k), rho, k).value;
}

// ---------------------------------------------------------------------------

QfiBound qfi_lower_bound(double e_ground, const DensityMatrix& rho, int n, double J, const std::vector<double>& field,
                         const std::vector<Observable>& generators, const Observable& h) {
  if (n < 2) throw ValidationError("qfi_lower_bound: need at least two particles");
  if (!(J > 0.0)) throw PreconditionError("qfi_lower_bound: the coupling must be ferromagnetic (J > 0)");
  if (h.dim() != rho.dim()) throw DimensionError("qfi_lower_bound: h dimension differs from state");
  const double pairs = static_cast<double>(n) * (n - 1);
  QfiBound out;
  out.bound = 8.0 * e_ground / (pairs * J) + 8.0 * n * dot_field(rho, field, generators) / (pairs * J) +
              4.0 * mean_sq(rho, h);
  const auto d = h.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix diff = qcore::tensor(h.matrix(), id) - qcore::tensor(id, h.matrix());
  const double lmax = qcore::eig_hermitian(diff * diff).values.maxCoeff();
  out.delta_cap = 4.0 * d / n * std::sqrt(std::max(0.0, lmax));
  return out;
}

CollectivePoint collective_qfi_point(int n, double J, double bx) {
  const auto model = models::build_collective(n, J, {bx, 0.0, 0.0});
  // The spin flip maps |m> to |-m>. For large n and weak field the two lowest levels are degenerate to machine
  // precision, so diagonalise in the even sector, which holds the (nonnegative) ground state.
  const int half = n / 2;
  const int even_dim = half + 1;
  Matrix iso = Matrix::Zero(n + 1, even_dim);
  for (int i = 0; i < even_dim; ++i) {
    if (2 * i == n) {
      iso(i, i) = 1.0;
    } else {
      iso(i, i) = iso(n - i, i) = std::sqrt(0.5);
    }
  }
  const Matrix h_even = iso.adjoint() * model.hamiltonian.matrix() * iso;
  auto gs = oracles::ground_state(Observable(0.5 * (h_even + h_even.adjoint())));
  gs.state = iso * gs.state;
  const auto marg = models::reduced_from_collective(gs.state, n);
  const Observable jz = qcore::spin_matrices(0.5)[2];
  CollectivePoint p;
  p.bx = bx;
  p.e_ground = gs.energy;
  p.sx = qcore::expect(marg.rho1, qcore::pauli()[0]);
  p.fq = info::qfi(marg.rho1, jz);
  const auto b = qfi_lower_bound(gs.energy, marg.rho1, n, J, {bx, 0.0, 0.0}, qcore::pauli(), jz);
  p.bound = b.bound;
  p.delta = p.fq - b.bound;
  p.delta_cap = b.delta_cap;
  return p;
}

double heisenberg_sep_min(const DensityMatrix& rho, const DensityMatrix& sigma, double J,
                          const std::vector<double>& field, int n) {
  if (n % 2 != 0) throw PreconditionError("heisenberg_sep_min: the chain length must be even");
  const auto a = bloch(rho), b = bloch(sigma);
  const auto B = padded(field, 3);
  double fb = 0.0;
  for (int l = 0; l < 3; ++l) fb += B[l] * (a[l] + b[l]) / 2.0;
  return -J * n * (info::fidelity(rho, sigma) / 2.0 - 0.25) - n * fb;
}

FidelityBound fidelity_upper_bound(double e_ground, const DensityMatrix& rho, const DensityMatrix& sigma, int n1,
                                   int n2, double J, const std::vector<double>& field) {
  if (n1 < 1 || n2 < 1) throw ValidationError("fidelity_upper_bound: both groups need at least one particle");
  if (!(J > 0.0)) throw PreconditionError("fidelity_upper_bound: the coupling must be ferromagnetic (J > 0)");
  const auto a = bloch(rho), b = bloch(sigma);
  const auto B = padded(field, 3);
  double fb = 0.0;
  for (int l = 0; l < 3; ++l) fb += B[l] * (n1 * a[l] + n2 * b[l]);
  const double denom = static_cast<double>(n1) * n2 * J;
  FidelityBound out;
  out.bound = 0.5 - 2.0 * e_ground / denom - 2.0 * fb / denom;
  if (n2 == 1) out.err_cap = 2.0 / n1;
  out.vacuous = out.bound > 1.0;
  return out;
}

models::ModelSpec bipartite_heisenberg(int n1, int n2, double J, const std::vector<double>& field) {
  if (n1 < 1 || n2 < 1) throw ValidationError("bipartite_heisenberg: both groups need at least one particle");
  models::ModelSpec s;
  s.n = n1 + n2;
  s.d = 2;
  for (const auto& j : qcore::spin_matrices(0.5)) s.terms.push_back({-J, j});
  s.field = padded(field, 3);
  s.generators = qcore::pauli();
  for (int a = 1; a <= n1; ++a)
    for (int b = n1 + 1; b <= s.n; ++b) s.edges.push_back({a, b});
  return s;
}

double antiferro_symsep(const DensityMatrix& rho, double lambda, int n) {
  if (n < 2) throw ValidationError("antiferro_symsep: need at least two particles");
  const auto j = qcore::spin_matrices(0.5);
  const double jx = qcore::expect(rho, j[0]);
  return n / 4.0 + n * (n - 1.0) * jx * jx - lambda * n * qcore::expect(rho, j[2]);
}

info::RoofValue antiferro_symsep_general(const DensityMatrix& rho, const std::vector<Observable>& hs, double lambda,
                                          int n) {
  if (n < 2) throw ValidationError("antiferro_symsep_general: need at least two particles");
  if (rho.dim() != 2) throw UnsupportedError("antiferro_symsep_general: only qubits are supported");
  const auto corr = info::sym_sep_corr_min(rho, hs, TwoPartySet::symsep);
  double local = 0.0;
  for (const auto& h : hs) local += mean_sq(rho, h);
  const double jz = qcore::expect(rho, qcore::spin_matrices(0.5)[2]);
  return {n * local + n * (n - 1.0) * corr.value - lambda * n * jz, corr.exactness};
}

double pfeuty_energy(double J, double bx) {
  const double a = J / 4.0;
  auto f = [&](double k) { return std::sqrt(std::max(0.0, a * a + bx * bx + 2.0 * a * bx * std::cos(k))); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 20, 1e-12);
  return -integral / std::numbers::pi;
}

FixedMagnetization pfeuty_fixed_magnetization(double J, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw ValidationError("pfeuty_fixed_magnetization: m must lie in [0, 1)");
  // e(m) = max_B [e(B) + B m], a concave maximisation
  auto neg = [&](double b) { return -(pfeuty_energy(J, b) + b * m); };
  const double hi = 50.0 * std::max(1.0, std::abs(J));
  const auto r = boost::math::tools::brent_find_minima(neg, 0.0, hi, 52);
  return {-r.second, r.first};
}

// ---------------------------------------------------------------------------

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::corr_qfi:
      return "corr_qfi";
    case Criterion::sym_two_sided:
      return "sym_two_sided";
    case Criterion::sym_two_ops:
      return "sym_two_ops";
    case Criterion::fidelity_corr:
      return "fidelity_corr";
    case Criterion::collective_qfi:
      return "collective_qfi";
  }
  return "unknown";
}

Criterion criterion_from_string(const std::string& s) {
  for (auto c : {Criterion::corr_qfi, Criterion::sym_two_sided, Criterion::sym_two_ops, Criterion::fidelity_corr,
                 Criterion::collective_qfi})
    if (s == to_string(c)) return c;
  throw ValidationError("unknown criterion: " + s);
}

namespace {
bool bosonic(const DensityMatrix& rho_ab) {
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho_ab.dim()))));
  const Matrix f = qcore::flip_operator(d).matrix();
  return qcore::max_abs(f * rho_ab.matrix() - rho_ab.matrix()) <= 1e-9;
}

double pair_corr(const DensityMatrix& rho_ab, const Observable& h) {
  if (h.dim() * h.dim() != rho_ab.dim()) throw DimensionError("witness: observable does not match the pair");
  return qcore::expect(rho_ab.matrix(), qcore::tensor(h.matrix(), h.matrix()));
}
}  // namespace

WitnessReport witness_corr_qfi(const DensityMatrix& rho_ab, const Observable& h) {
  const auto [ra, rb] = pair_marginals(rho_ab);
  WitnessReport w;
  w.criterion = Criterion::corr_qfi;
  const bool same = qcore::max_abs(ra.matrix() - rb.matrix()) <= 1e-8;
  const DensityMatrix rho(0.5 * (ra.matrix() + rb.matrix()));
  w.lhs = pair_corr(rho_ab, h);
  w.rhs = mean_sq(rho, h) - info::qfi(rho, h) / 4.0;
  const double m = qcore::expect(rho, h);
  w.applicable = same && w.lhs - m * m >= -kViolationTol;
  w.violated = w.applicable && w.lhs > w.rhs + kViolationTol;
  return w;
}

WitnessReport witness_sym_two_sided(const DensityMatrix& rho_ab, const Observable& h) {
  const auto [ra, rb] = pair_marginals(rho_ab);
  WitnessReport w;
  w.criterion = Criterion::sym_two_sided;
  const DensityMatrix rho(0.5 * (ra.matrix() + rb.matrix()));
  w.lhs = pair_corr(rho_ab, h);
  w.rhs = mean_sq(rho, h) - info::qfi(rho, h) / 4.0;
  const double m = qcore::expect(rho, h);
  w.lower = m * m;
  w.applicable = bosonic(rho_ab);
  w.violated = w.applicable && (w.lhs > w.rhs + kViolationTol || w.lhs < *w.lower - kViolationTol);
  return w;
}

WitnessReport witness_sym_two_ops(const DensityMatrix& rho_ab, const Observable& h1, const Observable& h2) {
  const auto [ra, rb] = pair_marginals(rho_ab);
  WitnessReport w;
  w.criterion = Criterion::sym_two_ops;
  const DensityMatrix rho(0.5 * (ra.matrix() + rb.matrix()));
  const double m1 = qcore::expect(rho, h1), m2 = qcore::expect(rho, h2);
  w.lhs = m1 * m1 + m2 * m2;
  w.rhs = pair_corr(rho_ab, h1) + pair_corr(rho_ab, h2);
  w.applicable = bosonic(rho_ab);
  w.violated = w.applicable && w.lhs > w.rhs + kViolationTol;
  return w;
}

WitnessReport witness_fidelity_corr(const DensityMatrix& rho_ab) {
  if (rho_ab.dim() != 4) throw UnsupportedError("fidelity criterion: only two qubits are supported");
  const auto [ra, rb] = pair_marginals(rho_ab);
  const auto j = qcore::spin_matrices(0.5);
  WitnessReport w;
  w.criterion = Criterion::fidelity_corr;
  double product = 0.0;
  for (const auto& jl : j) {
    w.lhs += pair_corr(rho_ab, jl);
    product += qcore::expect(ra, jl) * qcore::expect(rb, jl);
  }
  w.rhs = info::fidelity(ra, rb) / 2.0 - 0.25;
  w.applicable = w.lhs - product >= -kViolationTol;
  w.violated = w.applicable && w.lhs > w.rhs + kViolationTol;
  return w;
}

WitnessReport witness_collective_qfi(double jz2, const DensityMatrix& average, int n) {
  if (n < 2) throw ValidationError("collective criterion: need at least two particles");
  if (average.dim() != 2) throw UnsupportedError("collective criterion: only qubits are supported");
  const Observable jz = qcore::spin_matrices(0.5)[2];
  WitnessReport w;
  w.criterion = Criterion::collective_qfi;
  w.lhs = jz2;
  w.rhs = static_cast<double>(n) * n * mean_sq(average, jz) - n * (n - 1.0) / 4.0 * info::qfi(average, jz);
  w.applicable = true;
  w.violated = w.lhs > w.rhs + kViolationTol;
  return w;
}

WitnessReport witness(Criterion c, const WitnessInputs& in) {
  auto need_state = [&]() -> const DensityMatrix& {
    if (!in.rho_ab) throw ValidationError("witness: a two-party state is required");
    return *in.rho_ab;
  };
  switch (c) {
    case Criterion::corr_qfi:
      if (in.hs.size() != 1) throw ValidationError("witness: exactly one observable is required");
      return witness_corr_qfi(need_state(), in.hs[0]);
    case Criterion::sym_two_sided:
      if (in.hs.size() != 1) throw ValidationError("witness: exactly one observable is required");
      return witness_sym_two_sided(need_state(), in.hs[0]);
    case Criterion::sym_two_ops:
      if (in.hs.size() != 2) throw ValidationError("witness: exactly two observables are required");
      return witness_sym_two_ops(need_state(), in.hs[0], in.hs[1]);
    case Criterion::fidelity_corr:
      return witness_fidelity_corr(need_state());
    case Criterion::collective_qfi:
      if (!in.average) throw ValidationError("witness: the average single-particle state is required");
      return witness_collective_qfi(in.jz2, *in.average, in.n);
  }
  throw ValidationError("witness: unknown criterion");
}

// ---------------------------------------------------------------------------

BoundReport make_report(const models::ModelSpec& spec) {
  spec.validate();
  BoundReport r{spec, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const auto gs = oracles::ground_state(models::build_hamiltonian(spec));
  r.E_ground = gs.energy;
  std::vector<int> dims(spec.n, spec.d);
  const int first[1] = {0};
  const DensityMatrix rho = qcore::reduced_state(gs.state, dims, first);
  r.marginals.push_back(rho);

  // the pair bounds use one marginal for every site
  bool uniform = true;
  for (int s = 1; s < spec.n && uniform; ++s) {
    const int site[1] = {s};
    uniform = qcore::max_abs(qcore::reduced_state(gs.state, dims, site).matrix() - rho.matrix()) <= 1e-8;
  }
  if (!uniform || spec.pair_count() == 0) return r;

  try {
    const auto sep = e_sep_lower(spec, rho, TwoPartySet::sep);
    if (sep.saturated) r.E_sep = sep.value;
  } catch (const UnsupportedError&) {
  }
  if (is_complete_graph(spec)) {
    const auto sym = e_sep_lower(spec, rho, TwoPartySet::symsep);
    if (sym.saturated) r.E_symsep = sym.value;
  }

  std::vector<const models::CouplingTerm*> active;
  for (const auto& t : spec.terms)
    if (t.coupling != 0.0) active.push_back(&t);
  const bool single_ferro = active.size() == 1 && active.front()->coupling < 0.0;
  const bool field_ok = !spec.has_field() || models::is_regular(spec.n, spec.edges);
  if (single_ferro && spec.d == 2 && field_ok) {
    const auto& h = active.front()->op;
    const double cmax = mean_sq(rho, h) - info::wy_skew(rho, h);
    r.E_L = spec.pair_count() * active.front()->coupling * cmax - spec.n * dot_field(rho, spec.field, spec.generator_set());
  }
  if (single_ferro && is_complete_graph(spec)) {
    const auto& h = active.front()->op;
    const auto q = qfi_lower_bound(gs.energy, rho, spec.n, -active.front()->coupling, spec.field,
                                   spec.generator_set(), h);
    r.F_Q_bound = q.bound;
    r.delta = info::qfi(rho, h) - q.bound;
    r.delta_cap = q.delta_cap;
  }
  return r;
}

nlohmann::json report_to_json(const BoundReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json marg = nlohmann::json::array();
  for (const auto& m : r.marginals) marg.push_back(qcore::matrix_to_json(m.matrix()));
  return {{"model", models::spec_to_json(r.model)},
          {"E_sep", opt(r.E_sep)},
          {"E_symsep", opt(r.E_symsep)},
          {"E_L", opt(r.E_L)},
          {"E_ground", opt(r.E_ground)},
          {"F_Q_bound", opt(r.F_Q_bound)},
          {"delta", opt(r.delta)},
          {"delta_cap", opt(r.delta_cap)},
          {"fidelity_bound", opt(r.fidelity_bound)},
          {"marginals", marg}};
}

}  // namespace spinbound::bounds
