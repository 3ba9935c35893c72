#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "spinbound/models.hpp"
#include "spinbound/optim.hpp"
#include "spinbound/qcore.hpp"

namespace spinbound::oracles {

using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Observable;
using qcore::Vector;

struct OptimizerConfig {
  int restarts = 16;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-6;
  double objective_tol = 1e-12;
  int ensemble_size = 0;  // 0 selects d^2 for roofs and d^4 for couplings
  void validate() const;
};

/// sum_k p_k (x)_n |psi_{k,n}><psi_{k,n}|
struct ProductEnsemble {
  std::vector<double> weights;
  std::vector<std::vector<Vector>> locals;  // locals[k][party]

  int parties() const;
  int size() const { return static_cast<int>(weights.size()); }
  void validate() const;
  Matrix assemble() const;
  /// Marginal of one party.
  Matrix marginal(int party) const;
  /// Same components placed on `parties` copies: sum_k p_k |psi_k><psi_k|^(x parties).
  ProductEnsemble replicate(int parties) const;
};

enum class Direction { maximize, minimize };

struct OptimizationResult {
  double value = 0.0;
  ProductEnsemble ensemble;
  double feasibility_residual = 0.0;
  bool converged = false;
  int restarts = 0;
  int restarts_converged = 0;
};

struct AnyStateResult {
  double value = 0.0;
  Matrix state;
  double feasibility_residual = 0.0;
  bool converged = false;
  int restarts = 0;
  int restarts_converged = 0;
};

struct GroundState {
  double energy = 0.0;
  Vector state;
  double residual = 0.0;
};

GroundState ground_state(const Observable& h);

/// sum_k p_k sum_l <h_l>^2_{psi_k} for a single-party ensemble.
double roof_functional(const ProductEnsemble& e, const std::vector<Observable>& hs);

/// Extremes of roof_functional over pure-state decompositions of rho.
OptimizationResult roof_max(const DensityMatrix& rho, const std::vector<Observable>& hs,
                            const OptimizerConfig& cfg = {});
OptimizationResult roof_min(const DensityMatrix& rho, const std::vector<Observable>& hs,
                            const OptimizerConfig& cfg = {});

/// Extremum of Tr(objective * gamma) over separable two-party gamma with
/// marginals rho and sigma.
OptimizationResult sep_couple_opt(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                                  Direction direction, const OptimizerConfig& cfg = {});

/// Same over all two-party states with the given marginals.
AnyStateResult any_state_opt(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                             Direction direction, const OptimizerConfig& cfg = {});

/// Energy of the lattice state that places the first pair component on
/// colour-0 sites and the second on colour-1 sites.
double saturating_chain_state(const ProductEnsemble& pair, const models::ModelSpec& spec,
                              const std::vector<int>& coloring);

/// Energy of sum_k p_k |psi_k><psi_k|^(x n) under sum_{a<b} H_AB^(a,b).
double symmetric_extension_value(const std::vector<double>& weights, const std::vector<Vector>& states, int n,
                                 const Observable& h_ab);

/// The smooth objectives behind roof_search and sep_couple_opt (the latter at
/// its first penalty weight), for checking analytic gradients.
optim::Objective roof_objective(const DensityMatrix& rho, const std::vector<Observable>& hs, Direction direction,
                                int ensemble_size = 0);
optim::Objective coupling_objective(const DensityMatrix& rho, const DensityMatrix& sigma, const Observable& objective,
                                    Direction direction, int ensemble_size = 0);

nlohmann::json ensemble_to_json(const ProductEnsemble& e);
ProductEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace spinbound::oracles
