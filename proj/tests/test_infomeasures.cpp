#include <doctest.h>

#include "reference.hpp"
#include "spinbound/infomeasures.hpp"
#include "spinbound/random.hpp"

using namespace spinbound;
using doctest::Approx;
using qcore::DensityMatrix;
using qcore::Observable;
using qcore::Vector;

namespace {
const Observable jx = qcore::spin_matrices(0.5)[0];
const Observable jy = qcore::spin_matrices(0.5)[1];
const Observable jz = qcore::spin_matrices(0.5)[2];
const DensityMatrix plus = DensityMatrix::from_bloch(1, 0, 0);
const DensityMatrix mixed06 = DensityMatrix::from_bloch(0.6, 0, 0);
const DensityMatrix half = DensityMatrix::maximally_mixed(2);
const DensityMatrix up = DensityMatrix::from_bloch(0, 0, 1);
const DensityMatrix down = DensityMatrix::from_bloch(0, 0, -1);
}  // namespace

TEST_SUITE("infomeasures") {

TEST_CASE("variance") {
  CHECK(info::variance(plus, jz) == Approx(0.25));
  CHECK(info::variance(up, jz) == Approx(0.0));
  CHECK(info::variance(mixed06, jz) == Approx(0.25));
}

TEST_CASE("quantum Fisher information") {
  CHECK(info::qfi(plus, jz) == Approx(1.0));
  CHECK(info::qfi(half, jx) == Approx(0.0));
  CHECK(info::qfi(mixed06, jz) == Approx(0.36));

  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const auto rho = random_density(d, rng, trial % 4 == 0 ? 1 + trial % d : 0);
    const Observable h(random_hermitian(d, rng));
    const double f = info::qfi(rho, h);
    CHECK(std::abs(f - ref::qfi_sld(rho.matrix(), h.matrix())) < 1e-8);
    CHECK(f <= 4.0 * info::variance(rho, h) + 1e-10);
  }
}

TEST_CASE("Wigner-Yanase skew information") {
  CHECK(info::wy_skew(plus, jz) == Approx(0.25));
  CHECK(info::wy_skew(half, jz) == Approx(0.0).epsilon(1e-12));
  CHECK(info::wy_skew(mixed06, jz) == Approx(0.05));

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const auto rho = random_density(d, rng);
    const Observable h(random_hermitian(d, rng));
    const double w = info::wy_skew(rho, h);
    CHECK(std::abs(w - ref::wy_skew(rho.matrix(), h.matrix())) < 1e-9);
    // I_WY <= F_Q / 4 <= Var
    CHECK(w <= info::qfi(rho, h) / 4.0 + 1e-10);
  }
}

TEST_CASE("fidelity") {
  CHECK(info::fidelity(mixed06, mixed06) == Approx(1.0));
  CHECK(info::fidelity(up, down) == Approx(0.0).epsilon(1e-12));
  CHECK(info::fidelity(half, up) == Approx(0.5));

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 2;
    const auto a = random_density(d, rng), b = random_density(d, rng);
    const double f = info::fidelity(a, b);
    CHECK(std::abs(f - ref::fidelity_svd(a.matrix(), b.matrix())) < 1e-9);
    CHECK(std::abs(f - info::fidelity(b, a)) < 1e-9);
  }
}

TEST_CASE("two-party correlation extrema") {
  auto v = info::sep_corr_max(plus, {jz});
  CHECK(v.value == Approx(0.0).epsilon(1e-12));
  CHECK(v.exactness == info::Exactness::exact);
  CHECK(info::sep_corr_max(half, {jz}).value == Approx(0.25));
  CHECK(info::sep_corr_max(mixed06, {jz}).value == Approx(0.16));
  CHECK(info::sep_corr_max(half, {jx, jz}).exactness == info::Exactness::upper_bound);

  CHECK(info::any_state_corr_max_qubit(up, jx) == Approx(0.0).epsilon(1e-12));
  CHECK(info::any_state_corr_max_qubit(half, jz) == Approx(0.25));
  CHECK(info::any_state_corr_max_qubit(mixed06, jz) == Approx(0.20));
  CHECK_THROWS_AS(info::any_state_corr_max_qubit(DensityMatrix::maximally_mixed(3), qcore::spin_matrices(1.0)[2]),
                  qcore::UnsupportedError);

  CHECK(info::sep_corr_max_heisenberg(up, up) == Approx(0.25));
  CHECK(info::sep_corr_max_heisenberg(up, down) == Approx(-0.25));
  CHECK(info::sep_corr_max_heisenberg(half, half) == Approx(0.25));

  auto s = info::sym_sep_corr_min(half, {jz});
  CHECK(s.value == Approx(0.0).epsilon(1e-12));
  CHECK(s.exactness == info::Exactness::exact);
  CHECK(info::sym_sep_corr_min(mixed06, {jx}).value == Approx(0.09));
  auto three = info::sym_sep_corr_min(half, {jx, jy, jz});
  CHECK(three.value == Approx(0.0).epsilon(1e-12));
  CHECK(three.exactness == info::Exactness::lower_bound);
  CHECK(info::sym_sep_corr_min(half, {jz}, info::TwoPartySet::sep).exactness == info::Exactness::upper_bound);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(info::qfi(half, qcore::spin_matrices(1.0)[2]), qcore::DimensionError);
  CHECK_THROWS_AS(info::sep_corr_max(half, {}), qcore::ValidationError);
  CHECK(std::string(info::to_string(info::Exactness::lower_bound)) == "lower_bound");
}

}
