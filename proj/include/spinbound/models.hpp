#pragma once

#include <array>
#include <optional>
#include <vector>

#include <json.hpp>

#include "spinbound/qcore.hpp"

namespace spinbound::models {

using qcore::Matrix;
using qcore::Observable;

/// Interacting pair, 1-based site labels.
struct Edge {
  int a = 1;
  int b = 2;
  bool operator==(const Edge&) const = default;
};

struct CouplingTerm {
  double coupling;
  Observable op;
};

/// H = sum_{edges} sum_l J_l h_l x h_l - sum_l B_l sum_n g_l^(n)
struct ModelSpec {
  int n = 2;
  int d = 2;
  std::vector<CouplingTerm> terms;
  std::vector<double> field;           // B_l; empty means zero field
  std::vector<Observable> generators;  // g_l; empty means the Gell-Mann set
  std::vector<Edge> edges;

  int pair_count() const noexcept { return static_cast<int>(edges.size()); }
  /// Throws ValidationError / DimensionError when the description is inconsistent.
  void validate() const;
  std::vector<Observable> generator_set() const;
  /// Field padded to the generator count.
  std::vector<double> field_vector() const;
  bool has_field() const;
};

inline constexpr long long kMaxDenseDim = 4096;

Observable build_hamiltonian(const ModelSpec& spec);
Observable two_body_hamiltonian(const ModelSpec& spec);
/// sum_l B_l g_l on a single particle.
Matrix field_operator(const ModelSpec& spec);

struct LatticeGraph {
  std::vector<Edge> edges;
  std::optional<std::vector<int>> coloring;  // 0/1 per site when bipartite
};

/// Nearest-neighbour edges of a hypercubic lattice; sites are numbered
/// row-major with the first side slowest. Duplicate bonds are collapsed.
LatticeGraph lattice_edges(const std::vector<int>& sides, bool periodic);
std::vector<Edge> complete_graph_edges(int n);
std::optional<std::vector<int>> two_coloring(int n, const std::vector<Edge>& edges);
bool is_regular(int n, const std::vector<Edge>& edges);

/// Periodic Ising ring with coupling -J j_z j_z and field (bx, 0, 0) on sigma_x.
ModelSpec ising_ring(int n, double J, double bx);

struct CollectiveModel {
  int n;
  Matrix jx, jy, jz;
  Observable hamiltonian;
};

/// Fully connected ferromagnet -J sum_{n<n'} j_z j_z - sum_l B_l sum_n sigma_l
/// restricted to the maximal-spin block (basis J_z = n/2, ..., -n/2).
CollectiveModel build_collective(int n, double J, const std::array<double, 3>& field);

struct CollectiveMarginals {
  qcore::DensityMatrix rho1;
  qcore::DensityMatrix rho_ab;
};

CollectiveMarginals reduced_from_collective(const qcore::Vector& state, int n);

/// Isometry from the maximal-spin block into the full 2^n space.
Matrix symmetric_embedding(int n);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace spinbound::models
