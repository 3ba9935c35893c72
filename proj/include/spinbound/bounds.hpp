#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinbound/infomeasures.hpp"
#include "spinbound/models.hpp"
#include "spinbound/oracles.hpp"
#include "spinbound/qcore.hpp"

namespace spinbound::bounds {

using info::Exactness;
using info::TwoPartySet;
using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Observable;

// ---------------------------------------------------------------------------
// separable-state energies of general models

struct SepEnergy {
  double value = 0.0;
  Exactness exactness = Exactness::exact;  // of the two-party extremum
  bool saturated = false;                  // value equals the N-party minimum
  std::string method;
};

/// N_p times the two-party minimum of <H_AB> over the chosen set with marginals rho.
/// Couplings with J_l > 0 over `sep` need the oracle; without it this throws UnsupportedError.
SepEnergy e_sep_lower(const models::ModelSpec& spec, const DensityMatrix& rho, TwoPartySet set = TwoPartySet::sep,
                      const std::optional<oracles::OptimizerConfig>& oracle = std::nullopt);

// ---------------------------------------------------------------------------
// ferromagnetic chain: coupling -J h h on nearest neighbours, field B on g

struct FerroChain {
  int n = 2;
  double J = 1.0;
  std::vector<double> field;
  Observable h = qcore::spin_matrices(0.5)[2];
  std::vector<Observable> generators = qcore::pauli();

  double field_expectation(const DensityMatrix& rho) const;  // B . <g>
  Matrix field_operator() const;
};

FerroChain ising_chain(int n, double J, double bx);

double e_sep_chain(const DensityMatrix& rho, const FerroChain& chain);
double e_lower_wy(const DensityMatrix& rho, const FerroChain& chain);

/// -J sum_{n<k} h^(n) h^(n+1) - B sum_{1<n<k} g^(n) - (B/2)(g^(1) + g^(k)); zero for k = 1.
Matrix chain_block_hamiltonian(const FerroChain& chain, int k);

struct ConstrainedMin {
  double value = 0.0;     // certified lower bound (dual objective)
  double primal = 0.0;    // energy of the approximate minimiser
  double residual = 0.0;  // marginal mismatch of that minimiser
  bool converged = false;
};

/// Minimum of Tr(H X) over k-party states X whose every single-party marginal is rho.
ConstrainedMin marginal_constrained_min(const Matrix& h, const DensityMatrix& rho, int k);

enum class KprodMode { single_marginal, product_blocks, wy_blocks };

double kprod_bound(const DensityMatrix& rho, int k, const FerroChain& chain, KprodMode mode);
/// Bound evaluated for a given k-party block state.
double kprod_bound_block_state(const DensityMatrix& block, int k, const FerroChain& chain);
double e_lower_kblock(const DensityMatrix& rho, int k, const FerroChain& chain);

// ---------------------------------------------------------------------------
// fully connected and Heisenberg models

struct QfiBound {
  double bound = 0.0;
  double delta_cap = 0.0;
};

QfiBound qfi_lower_bound(double e_ground, const DensityMatrix& rho, int n, double J, const std::vector<double>& field,
                         const std::vector<Observable>& generators, const Observable& h);

struct CollectivePoint {
  double bx = 0.0;
  double sx = 0.0;  // <sigma_x> of the single-particle marginal
  double fq = 0.0;
  double bound = 0.0;
  double delta = 0.0;
  double delta_cap = 0.0;
  double e_ground = 0.0;
};

/// Ground state of the collective model at field (bx, 0, 0) and the resulting QFI bound for h = j_z.
CollectivePoint collective_qfi_point(int n, double J, double bx);

double heisenberg_sep_min(const DensityMatrix& rho, const DensityMatrix& sigma, double J,
                          const std::vector<double>& field, int n);

struct FidelityBound {
  double bound = 0.0;
  std::optional<double> err_cap;
  bool vacuous = false;
};

FidelityBound fidelity_upper_bound(double e_ground, const DensityMatrix& rho, const DensityMatrix& sigma, int n1,
                                   int n2, double J, const std::vector<double>& field);

/// -J sum_l sum_{n <= n1 < n'} j_l j_l - B . sum_n sigma, particles 1..n1 in the first group.
models::ModelSpec bipartite_heisenberg(int n1, int n2, double J, const std::vector<double>& field);

double antiferro_symsep(const DensityMatrix& rho, double lambda, int n);
/// N sum_l <h_l^2> + N(N-1) sum_l <h_l>^2 - lambda N <j_z>, exact for at most two h_l.
info::RoofValue antiferro_symsep_general(const DensityMatrix& rho, const std::vector<Observable>& hs, double lambda,
                                          int n);

double pfeuty_energy(double J, double bx);

struct FixedMagnetization {
  double energy = 0.0;
  double field = 0.0;
};

/// Minimum energy per site of the infinite chain at <sigma_x> = m and zero field.
FixedMagnetization pfeuty_fixed_magnetization(double J, double m);

// ---------------------------------------------------------------------------
// entanglement criteria

enum class Criterion { corr_qfi, sym_two_sided, sym_two_ops, fidelity_corr, collective_qfi };

const char* to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct WitnessReport {
  Criterion criterion = Criterion::corr_qfi;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> lower;  // two-sided criteria only
  bool applicable = false;
  bool violated = false;
};

struct WitnessInputs {
  std::optional<DensityMatrix> rho_ab;
  std::vector<Observable> hs;
  // collective criterion
  double jz2 = 0.0;
  std::optional<DensityMatrix> average;
  int n = 0;
};

WitnessReport witness(Criterion c, const WitnessInputs& in);
WitnessReport witness_corr_qfi(const DensityMatrix& rho_ab, const Observable& h);
WitnessReport witness_sym_two_sided(const DensityMatrix& rho_ab, const Observable& h);
WitnessReport witness_sym_two_ops(const DensityMatrix& rho_ab, const Observable& h1, const Observable& h2);
WitnessReport witness_fidelity_corr(const DensityMatrix& rho_ab);
WitnessReport witness_collective_qfi(double jz2, const DensityMatrix& average, int n);

// ---------------------------------------------------------------------------

struct BoundReport {
  models::ModelSpec model;
  std::optional<double> E_sep, E_symsep, E_L, E_ground, F_Q_bound, delta, delta_cap, fidelity_bound;
  std::vector<DensityMatrix> marginals;
};

/// Ground state, its site-1 marginal and every bound that applies to the model.
BoundReport make_report(const models::ModelSpec& spec);
nlohmann::json report_to_json(const BoundReport& r);

}  // namespace spinbound::bounds
