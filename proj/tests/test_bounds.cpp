#include <doctest.h>

#include <numbers>

#include "reference.hpp"
#include "spinbound/bounds.hpp"
#include "spinbound/random.hpp"

using namespace spinbound;
using bounds::KprodMode;
using doctest::Approx;
using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Observable;
using qcore::Vector;

namespace {

const Observable jx = qcore::spin_matrices(0.5)[0];
const Observable jy = qcore::spin_matrices(0.5)[1];
const Observable jz = qcore::spin_matrices(0.5)[2];
const DensityMatrix half = DensityMatrix::maximally_mixed(2);
const DensityMatrix up = DensityMatrix::from_bloch(0, 0, 1);
const DensityMatrix down = DensityMatrix::from_bloch(0, 0, -1);
const DensityMatrix m06 = DensityMatrix::from_bloch(0.6, 0, 0);

models::ModelSpec ring(int n, double bx = 0.0) { return models::ising_ring(n, 1.0, bx); }

DensityMatrix site0(const Vector& psi, int n) {
  std::vector<int> dims(n, 2);
  const int keep[1] = {0};
  return qcore::reduced_state(psi, dims, keep);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("separable energy of general models") {
  auto s = bounds::e_sep_lower(ring(4), up);
  CHECK(s.value == Approx(-1.0));
  CHECK(s.exactness == info::Exactness::exact);
  CHECK(s.saturated);
  CHECK(bounds::e_sep_lower(ring(4), half).value == Approx(-1.0));

  const auto odd = bounds::e_sep_lower(ring(5), half);
  CHECK(odd.value == Approx(-1.25));
  CHECK_FALSE(odd.saturated);

  // the symmetric set on a complete graph
  models::ModelSpec complete = ring(4);
  complete.edges = models::complete_graph_edges(4);
  const auto sym = bounds::e_sep_lower(complete, m06, info::TwoPartySet::symsep);
  CHECK(sym.value == Approx(-6 * 0.16));
  CHECK(sym.saturated);

  // antiferromagnetic couplings over Sep need the oracle
  models::ModelSpec af = ring(4);
  af.terms = {{1.0, jz}};
  CHECK_THROWS_AS(bounds::e_sep_lower(af, half), qcore::UnsupportedError);
  const auto with_oracle = bounds::e_sep_lower(af, half, info::TwoPartySet::sep, oracles::OptimizerConfig{});
  CHECK(with_oracle.exactness == info::Exactness::upper_bound);
  CHECK(std::abs(with_oracle.value + 1.0) < 1e-4);  // |01>, |10> mixture gives -1/4 per bond
}

TEST_CASE("separable bound is attained and bounds the ground state") {
  for (double bx : {0.0, 0.2, 0.9}) {
    const auto spec = ring(8, bx);
    const auto gs = oracles::ground_state(models::build_hamiltonian(spec));
    const auto rho = site0(gs.state, 8);
    const auto sep = bounds::e_sep_lower(spec, rho);
    const double chain = bounds::e_sep_chain(rho, bounds::ising_chain(8, 1.0, bx));
    CHECK(std::abs(sep.value - chain) < 1e-12);
    CHECK(gs.energy <= chain + 1e-9);
    CHECK(bounds::e_lower_wy(rho, bounds::ising_chain(8, 1.0, bx)) <= gs.energy + 1e-9);

    // saturating state from a roof decomposition attains the bound
    const auto roof = oracles::roof_max(rho, {jz});
    const auto g = models::lattice_edges({8}, true);
    const double sat = oracles::saturating_chain_state(roof.ensemble.replicate(2), spec, *g.coloring);
    CHECK(std::abs(sat - chain) < 1e-4);
  }
}

TEST_CASE("chain closed forms") {
  const auto c0 = bounds::ising_chain(10, 1.0, 0.0);
  CHECK(bounds::e_sep_chain(up, c0) == Approx(-2.5));
  CHECK(bounds::e_sep_chain(half, c0) == Approx(-2.5));
  CHECK(bounds::e_sep_chain(m06, bounds::ising_chain(10, 1.0, 0.2)) == Approx(-2.8));
  CHECK(bounds::e_lower_wy(m06, c0) == Approx(-2.0));
  Vector psi(2);
  psi << 0.6, qcore::Complex(0, 0.8);
  const auto pure = DensityMatrix::pure(psi);
  CHECK(bounds::e_lower_wy(pure, c0) == Approx(bounds::e_sep_chain(pure, c0)));

  CHECK_THROWS_AS(bounds::e_sep_chain(half, bounds::ising_chain(9, 1.0, 0.0)), qcore::PreconditionError);
  CHECK_THROWS_AS(bounds::e_sep_chain(half, bounds::ising_chain(10, -1.0, 0.0)), qcore::PreconditionError);
  bounds::FerroChain qutrit;
  qutrit.n = 4;
  qutrit.h = qcore::spin_matrices(1.0)[2];
  qutrit.generators = qcore::gellmann(3);
  CHECK_THROWS_AS(bounds::e_lower_wy(DensityMatrix::maximally_mixed(3), qutrit), qcore::UnsupportedError);
  CHECK(bounds::e_sep_chain(DensityMatrix::maximally_mixed(3), qutrit) == Approx(-4.0 * 2.0 / 3.0));
}

TEST_CASE("block Hamiltonian") {
  const auto c = bounds::ising_chain(6, 1.0, 0.3);
  CHECK(qcore::max_abs(bounds::chain_block_hamiltonian(c, 1)) == 0.0);
  const Matrix h3 = bounds::chain_block_hamiltonian(c, 3);
  Matrix expected = Matrix::Zero(8, 8);
  for (int s = 0; s < 2; ++s) expected -= ref::on_site(ref::sz(), s, 3) * ref::on_site(ref::sz(), s + 1, 3) / 4.0;
  expected -= 0.3 * (0.5 * ref::on_site(ref::sx(), 0, 3) + ref::on_site(ref::sx(), 1, 3) +
                     0.5 * ref::on_site(ref::sx(), 2, 3));
  CHECK(qcore::max_abs(h3 - expected) < 1e-14);
}

TEST_CASE("marginal constrained minimum") {
  const auto c = bounds::ising_chain(10, 1.0, 0.0);
  const Matrix h2 = bounds::chain_block_hamiltonian(c, 2);
  // k = 2 reproduces the general-state correlation maximum
  for (const auto& rho : {half, m06, DensityMatrix::from_bloch(0.3, 0.2, 0.1)}) {
    const auto r = bounds::marginal_constrained_min(h2, rho, 2);
    CHECK(r.converged);
    const double expected = -(0.25 - ref::wy_skew(rho.matrix(), jz.matrix()));
    CHECK(std::abs(r.value - expected) < 1e-7);
    CHECK(r.value <= expected + 1e-9);
    CHECK(std::abs(r.primal - r.value) < 1e-6);
    CHECK(r.residual < 1e-6);
  }
  // pure marginals force the product state
  Vector psi(2);
  psi << 0.6, 0.8;
  const auto pure = DensityMatrix::pure(psi);
  const Matrix h3 = bounds::chain_block_hamiltonian(c, 3);
  Vector prod = qcore::tensor(qcore::tensor(psi, psi), psi);
  CHECK(bounds::marginal_constrained_min(h3, pure, 3).value == Approx(qcore::expect(prod, h3)));
  // each bond of the 3-block is a 2-party state with the same marginals
  CHECK(bounds::marginal_constrained_min(h3, m06, 3).value >= 2 * bounds::marginal_constrained_min(h2, m06, 2).value - 1e-7);
}

TEST_CASE("k-producible bounds") {
  const auto c = bounds::ising_chain(10, 1.0, 0.0);
  CHECK(bounds::kprod_bound(half, 2, c, KprodMode::single_marginal) == Approx(-2.5).epsilon(1e-8));
  CHECK(bounds::kprod_bound(half, 1, c, KprodMode::single_marginal) == Approx(bounds::e_sep_chain(half, c)));
  for (double m : {0.1, 0.3}) {
    const auto rho = DensityMatrix::from_bloch(m, 0, 0);
    CHECK(bounds::kprod_bound(rho, 1, c, KprodMode::single_marginal) == Approx(bounds::e_sep_chain(rho, c)));
    CHECK(bounds::e_lower_kblock(rho, 2, c) == Approx(bounds::e_lower_wy(rho, c)).epsilon(1e-8));
    for (int k : {1, 2, 5}) {
      const double q = bounds::kprod_bound(rho, k, c, KprodMode::single_marginal);
      CHECK(bounds::kprod_bound(rho, k, c, KprodMode::product_blocks) >= q - 1e-12);
      CHECK(bounds::kprod_bound(rho, k, c, KprodMode::wy_blocks) <= q + 1e-12);
    }
  }
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto rho = random_density(2, rng);
    const auto cf = bounds::ising_chain(10, 1.0, 0.2);
    CHECK(bounds::kprod_bound(rho, 2, cf, KprodMode::product_blocks) >=
          bounds::kprod_bound(rho, 2, cf, KprodMode::single_marginal) - 1e-12);
  }
  CHECK_THROWS_AS(bounds::kprod_bound(half, 3, c, KprodMode::single_marginal), qcore::PreconditionError);
  CHECK_THROWS_AS(bounds::e_lower_kblock(half, 4, c), qcore::PreconditionError);

  // a product block state reproduces the single-marginal formula
  Vector psi(2);
  psi << 0.6, 0.8;
  const auto pure = DensityMatrix::pure(psi);
  const auto block = qcore::tensor(pure, pure);
  const double direct = bounds::kprod_bound_block_state(block, 2, c);
  const double formula = 5.0 * qcore::expect(block.matrix(), bounds::chain_block_hamiltonian(c, 2)) -
                         5.0 * (0.25 - info::qfi(pure, jz) / 4.0);
  CHECK(direct == Approx(formula));
}

TEST_CASE("Fisher information bound on the complete graph") {
  const auto b = bounds::qfi_lower_bound(-1.0, half, 10, 1.0, {}, qcore::pauli(), jz);
  CHECK(b.delta_cap == Approx(0.8));
  for (int n : {4, 10}) {
    for (double bx : {0.2, 0.7, 1.3}) {
      const auto p = bounds::collective_qfi_point(n, 1.0, bx);
      CHECK(p.delta >= -1e-9);
      CHECK(p.delta <= 8.0 / n);
      // same numbers from the full 2^n space
      models::ModelSpec full;
      full.n = n;
      full.d = 2;
      full.terms = {{-1.0, jz}};
      full.field = {bx, 0.0, 0.0};
      full.generators = qcore::pauli();
      full.edges = models::complete_graph_edges(n);
      const Matrix h = models::build_hamiltonian(full).matrix();
      CHECK(std::abs(p.e_ground - ref::ground_energy(h)) < 1e-9);
      const auto rep = bounds::make_report(full);
      REQUIRE(rep.delta.has_value());
      CHECK(std::abs(*rep.delta - p.delta) < 1e-8);
    }
  }
  // the ground state at weak field keeps the spin-flip symmetry
  const auto weak = bounds::collective_qfi_point(60, 1.0, 0.3);
  CHECK(weak.sx > 0.0);
  CHECK(weak.delta >= -1e-9);
}

TEST_CASE("Heisenberg model bounds") {
  CHECK(bounds::heisenberg_sep_min(up, up, 1.0, {}, 4) == Approx(-1.0));
  CHECK(bounds::heisenberg_sep_min(up, down, 1.0, {}, 4) == Approx(1.0));
  CHECK(bounds::heisenberg_sep_min(half, half, 1.0, {}, 4) == Approx(-1.0));
  CHECK_THROWS_AS(bounds::heisenberg_sep_min(up, up, 1.0, {}, 3), qcore::PreconditionError);

  // N1 = N2 = 1: the ferromagnetic pair has the triplet ground energy -J/4
  const auto pair = bounds::bipartite_heisenberg(1, 1, 1.0, {});
  const auto gs = oracles::ground_state(models::build_hamiltonian(pair));
  CHECK(gs.energy == Approx(-0.25));
  const auto fb = bounds::fidelity_upper_bound(gs.energy, up, up, 1, 1, 1.0, {});
  CHECK(fb.bound == Approx(1.0));
  CHECK(fb.err_cap.has_value());
  CHECK_FALSE(fb.vacuous);
  // a hypothetical singlet energy makes the bound vacuous
  CHECK(bounds::fidelity_upper_bound(-0.75, half, half, 1, 1, 1.0, {}).vacuous);

  for (int n1 : {4, 6}) {
    const auto spec = bounds::bipartite_heisenberg(n1, 1, 1.0, {0.0, 0.0, 0.15});
    const auto g = oracles::ground_state(models::build_hamiltonian(spec));
    const int n = n1 + 1;
    std::vector<int> dims(n, 2);
    const int a[1] = {0}, b[1] = {n - 1};
    const auto ra = qcore::reduced_state(g.state, dims, a), rb = qcore::reduced_state(g.state, dims, b);
    const auto f = bounds::fidelity_upper_bound(g.energy, ra, rb, n1, 1, 1.0, {0.0, 0.0, 0.15});
    const double fid = ref::fidelity_svd(ra.matrix(), rb.matrix());
    CHECK(fid <= f.bound + 1e-9);
    CHECK(f.bound <= fid + 2.0 / n1 + 1e-9);
  }
}

TEST_CASE("antiferromagnetic symmetric bounds") {
  const auto rho = DensityMatrix::from_bloch(0.0, 0.0, 0.4);
  CHECK(bounds::antiferro_symsep(rho, 0.7, 6) == Approx(6 / 4.0 - 0.7 * 6 * 0.2));
  const auto gen = bounds::antiferro_symsep_general(m06, {jx, jy, jz}, 0.5, 4);
  CHECK(gen.exactness == info::Exactness::lower_bound);
  CHECK(gen.value == Approx(4 * 0.75 + 12 * 0.09));
  CHECK(bounds::antiferro_symsep_general(m06, {jx}, 0.3, 4).value == Approx(bounds::antiferro_symsep(m06, 0.3, 4)));
}

TEST_CASE("infinite chain reference") {
  CHECK(bounds::pfeuty_energy(1.0, 0.0) == Approx(-0.25));
  CHECK(bounds::pfeuty_energy(0.0, 0.8) == Approx(-0.8));
  CHECK(std::abs(bounds::pfeuty_energy(1.0, 0.25) + 1.0 / std::numbers::pi) < 1e-9);
  // finite rings approach the infinite chain
  CHECK(std::abs(ref::ground_energy(ref::ising_ring(8, 1.0, 1.0)) / 8 - bounds::pfeuty_energy(1.0, 1.0)) < 1e-5);

  const auto fm = bounds::pfeuty_fixed_magnetization(1.0, 0.3);
  // at the optimal field, <sigma_x> = -de/dB equals m
  const double h = 1e-5;
  const double slope = (bounds::pfeuty_energy(1.0, fm.field + h) - bounds::pfeuty_energy(1.0, fm.field - h)) / (2 * h);
  CHECK(std::abs(-slope - 0.3) < 1e-4);
  CHECK(fm.energy == Approx(bounds::pfeuty_energy(1.0, fm.field) + fm.field * 0.3));
  CHECK_THROWS_AS(bounds::pfeuty_fixed_magnetization(1.0, 1.0), qcore::ValidationError);
}

TEST_CASE("witnesses") {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = std::sqrt(0.5);
  const auto wb = bounds::witness_corr_qfi(DensityMatrix::pure(bell), jx);
  CHECK(wb.lhs == Approx(0.25));
  CHECK(wb.rhs == Approx(0.25));
  CHECK_FALSE(wb.violated);

  const double th = std::numbers::pi / 8;
  Vector psi = Vector::Zero(4);
  psi(0) = std::cos(th);
  psi(3) = std::sin(th);
  const auto w = bounds::witness_corr_qfi(DensityMatrix::pure(psi), jx);
  CHECK(w.lhs == Approx(std::sin(2 * th) / 4));
  CHECK(w.rhs == Approx(0.125));
  CHECK(w.violated);

  // |+>^N saturates the collective criterion
  const auto plus = DensityMatrix::from_bloch(1, 0, 0);
  const auto wc = bounds::witness_collective_qfi(6 / 4.0, plus, 6);
  CHECK(wc.lhs == Approx(wc.rhs));
  CHECK_FALSE(wc.violated);

  // a product state is never flagged
  Rng rng(3);
  const auto a = random_density(2, rng);
  const auto prod = qcore::tensor(a, a);
  CHECK_FALSE(bounds::witness_corr_qfi(prod, jz).violated);
  CHECK_FALSE(bounds::witness_fidelity_corr(prod).violated);
  CHECK_FALSE(bounds::witness_sym_two_sided(prod, jz).violated);
  CHECK_FALSE(bounds::witness_sym_two_ops(prod, jx, jz).violated);

  // singlet is not bosonic
  Vector singlet = Vector::Zero(4);
  singlet(1) = std::sqrt(0.5);
  singlet(2) = -std::sqrt(0.5);
  CHECK_FALSE(bounds::witness_sym_two_sided(DensityMatrix::pure(singlet), jz).applicable);
  CHECK(bounds::witness_fidelity_corr(DensityMatrix::pure(singlet)).applicable == false);

  bounds::WitnessInputs in;
  in.rho_ab = DensityMatrix::pure(psi);
  in.hs = {jx};
  CHECK(bounds::witness(bounds::criterion_from_string("corr_qfi"), in).violated);
  CHECK_THROWS_AS(bounds::criterion_from_string("nope"), qcore::ValidationError);
  in.hs.clear();
  CHECK_THROWS_AS(bounds::witness(bounds::Criterion::corr_qfi, in), qcore::ValidationError);
}

TEST_CASE("bound report") {
  const auto r = bounds::make_report(ring(6, 0.4));
  REQUIRE(r.E_ground.has_value());
  REQUIRE(r.E_sep.has_value());
  REQUIRE(r.E_L.has_value());
  CHECK(*r.E_L <= *r.E_ground + 1e-9);
  CHECK(*r.E_ground <= *r.E_sep + 1e-9);
  CHECK_FALSE(r.F_Q_bound.has_value());
  const auto j = bounds::report_to_json(r);
  CHECK(j.at("F_Q_bound").is_null());
  CHECK(j.at("E_sep").is_number());
  CHECK(j.at("marginals").size() == 1);

  const auto odd = bounds::make_report(ring(5, 0.4));
  CHECK_FALSE(odd.E_sep.has_value());
}

}
