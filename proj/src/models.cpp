#include "spinbound/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>
#include <set>
#include <string>

namespace spinbound::models {

using qcore::Complex;
using qcore::DimensionError;
using qcore::ValidationError;

namespace {

long long dense_dim(int n, int d) {
  long long dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= d;
    if (dim > kMaxDenseDim) throw DimensionError("model dimension exceeds dense limit of 4096");
  }
  return dim;
}

}  // namespace

std::vector<Observable> ModelSpec::generator_set() const {
  if (!generators.empty()) return generators;
  return qcore::gellmann(d);
}

std::vector<double> ModelSpec::field_vector() const {
  std::vector<double> b = field;
  b.resize(generator_set().size(), 0.0);
  return b;
}

bool ModelSpec::has_field() const {
  return std::any_of(field.begin(), field.end(), [](double v) { return v != 0.0; });
}

void ModelSpec::validate() const {
  if (n < 1) throw ValidationError("model: particle count must be positive");
  if (d < 2) throw ValidationError("model: local dimension must be at least 2");
  for (const auto& t : terms) {
    if (t.op.dim() != d) throw DimensionError("model: coupling operator has wrong dimension");
    if (!std::isfinite(t.coupling)) throw ValidationError("model: non-finite coupling");
  }
  const auto gens = generator_set();
  for (const auto& g : gens)
    if (g.dim() != d) throw DimensionError("model: generator has wrong dimension");
  if (field.size() > gens.size()) throw DimensionError("model: more field components than generators");
  for (double b : field)
    if (!std::isfinite(b)) throw ValidationError("model: non-finite field");
  for (const auto& e : edges) {
    if (e.a < 1 || e.a > n || e.b < 1 || e.b > n) throw ValidationError("model: edge endpoint out of range");
    if (e.a == e.b) throw ValidationError("model: self-loop");
  }
}

Matrix field_operator(const ModelSpec& spec) {
  const auto gens = spec.generator_set();
  const auto b = spec.field_vector();
  Matrix f = Matrix::Zero(spec.d, spec.d);
  for (size_t l = 0; l < gens.size(); ++l) f += b[l] * gens[l].matrix();
  return f;
}

Observable build_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  const long long dim = dense_dim(spec.n, spec.d);
  Matrix h = Matrix::Zero(dim, dim);
  Matrix pair = Matrix::Zero(spec.d * spec.d, spec.d * spec.d);
  for (const auto& t : spec.terms) pair += t.coupling * qcore::tensor(t.op.matrix(), t.op.matrix());
  for (const auto& e : spec.edges) {
    const int sites[2] = {e.a - 1, e.b - 1};
    qcore::add_embedded(h, pair, sites, spec.n, spec.d);
  }
  if (spec.has_field()) {
    const Matrix f = field_operator(spec);
    for (int s = 0; s < spec.n; ++s) {
      const int site[1] = {s};
      qcore::add_embedded(h, f, site, spec.n, spec.d, -1.0);
    }
  }
  return Observable(std::move(h));
}

Observable two_body_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  if (spec.pair_count() == 0) throw ValidationError("two_body_hamiltonian: model has no interacting pairs");
  const int d = spec.d;
  Matrix h = Matrix::Zero(d * d, d * d);
  for (const auto& t : spec.terms) h += t.coupling * qcore::tensor(t.op.matrix(), t.op.matrix());
  if (spec.has_field()) {
    const Matrix f = field_operator(spec);
    const Matrix id = Matrix::Identity(d, d);
    const double c = static_cast<double>(spec.n) / (2.0 * spec.pair_count());
    h -= c * (qcore::tensor(f, id) + qcore::tensor(id, f));
  }
  return Observable(std::move(h));
}

std::optional<std::vector<int>> two_coloring(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) {
    adj[e.a - 1].push_back(e.b - 1);
    adj[e.b - 1].push_back(e.a - 1);
  }
  std::vector<int> color(n, -1);
  for (int s = 0; s < n; ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (color[v] < 0) {
          color[v] = 1 - color[u];
          q.push(v);
        } else if (color[v] == color[u]) {
          return std::nullopt;
        }
      }
    }
  }
  return color;
}

LatticeGraph lattice_edges(const std::vector<int>& sides, bool periodic) {
  if (sides.empty()) throw ValidationError("lattice_edges: no sides given");
  int n = 1;
  for (int s : sides) {
    if (s < 1) throw ValidationError("lattice_edges: side lengths must be positive");
    n *= s;
  }
  const int D = static_cast<int>(sides.size());
  std::vector<int> stride(D, 1);
  for (int i = D - 2; i >= 0; --i) stride[i] = stride[i + 1] * sides[i + 1];
  std::set<std::pair<int, int>> seen;
  LatticeGraph g;
  for (int site = 0; site < n; ++site) {
    for (int k = 0; k < D; ++k) {
      const int c = (site / stride[k]) % sides[k];
      int nc = c + 1;
      if (nc == sides[k]) {
        if (!periodic) continue;
        nc = 0;
      }
      const int other = site + (nc - c) * stride[k];
      if (other == site) continue;
      const auto key = std::minmax(site, other);
      if (!seen.insert(key).second) continue;
      g.edges.push_back({key.first + 1, key.second + 1});
    }
  }
  g.coloring = two_coloring(n, g.edges);
  return g;
}

std::vector<Edge> complete_graph_edges(int n) {
  if (n < 2) throw ValidationError("complete_graph_edges: need at least two particles");
  std::vector<Edge> e;
  e.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) e.push_back({a, b});
  return e;
}

bool is_regular(int n, const std::vector<Edge>& edges) {
  std::vector<int> deg(n, 0);
  for (const auto& e : edges) {
    ++deg[e.a - 1];
    ++deg[e.b - 1];
  }
  return std::all_of(deg.begin(), deg.end(), [&](int v) { return v == deg[0]; });
}

ModelSpec ising_ring(int n, double J, double bx) {
  ModelSpec s;
  s.n = n;
  s.d = 2;
  s.terms.push_back({-J, qcore::spin_matrices(0.5)[2]});
  s.field = {bx, 0.0, 0.0};
  s.generators = qcore::pauli();
  s.edges = lattice_edges({n}, true).edges;
  return s;
}

CollectiveModel build_collective(int n, double J, const std::array<double, 3>& field) {
  if (n < 2) throw ValidationError("build_collective: need at least two particles");
  const auto j = qcore::spin_matrices(0.5 * n);
  CollectiveModel m{n, j[0].matrix(), j[1].matrix(), j[2].matrix(), j[2]};
  const Matrix id = Matrix::Identity(n + 1, n + 1);
  Matrix h = -0.5 * J * (m.jz * m.jz - 0.25 * n * id);
  h -= 2.0 * (field[0] * m.jx + field[1] * m.jy + field[2] * m.jz);
  m.hamiltonian = Observable(0.5 * (h + h.adjoint()));
  return m;
}

CollectiveMarginals reduced_from_collective(const qcore::Vector& state, int n) {
  if (n < 2) throw ValidationError("reduced_from_collective: need at least two particles");
  if (state.size() != n + 1) throw DimensionError("reduced_from_collective: state must have dimension n+1");
  if (std::abs(state.norm() - 1.0) > 1e-9) throw ValidationError("reduced_from_collective: state is not normalized");
  const auto j = qcore::spin_matrices(0.5 * n);
  const auto p = qcore::pauli();
  std::array<double, 3> s{};
  std::array<std::array<double, 3>, 3> t{};
  for (int l = 0; l < 3; ++l) s[l] = 2.0 * qcore::expect(state, j[l].matrix()) / n;
  for (int l = 0; l < 3; ++l)
    for (int m = l; m < 3; ++m) {
      const Matrix ac = j[l].matrix() * j[m].matrix() + j[m].matrix() * j[l].matrix();
      const double v = (2.0 * qcore::expect(state, ac) - (l == m ? n : 0)) / (static_cast<double>(n) * (n - 1));
      t[l][m] = t[m][l] = v;
    }
  const Matrix id = Matrix::Identity(2, 2);
  Matrix r1 = 0.5 * id;
  Matrix rab = 0.25 * Matrix::Identity(4, 4);
  for (int l = 0; l < 3; ++l) {
    r1 += 0.5 * s[l] * p[l].matrix();
    rab += 0.25 * s[l] * (qcore::tensor(p[l].matrix(), id) + qcore::tensor(id, p[l].matrix()));
    for (int m = 0; m < 3; ++m) rab += 0.25 * t[l][m] * qcore::tensor(p[l].matrix(), p[m].matrix());
  }
  return {qcore::DensityMatrix(0.5 * (r1 + r1.adjoint())), qcore::DensityMatrix(0.5 * (rab + rab.adjoint()))};
}

Matrix symmetric_embedding(int n) {
  if (n < 1 || n > 12) throw DimensionError("symmetric_embedding: n must be in 1..12");
  const long long dim = 1LL << n;
  Matrix v = Matrix::Zero(dim, n + 1);
  std::vector<double> count(n + 1, 0.0);
  for (long long i = 0; i < dim; ++i) count[std::popcount(static_cast<unsigned long long>(i))] += 1.0;
  for (long long i = 0; i < dim; ++i) {
    const int k = std::popcount(static_cast<unsigned long long>(i));
    v(i, k) = 1.0 / std::sqrt(count[k]);
  }
  return v;
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : spec.terms) terms.push_back({{"j", t.coupling}, {"h", qcore::matrix_to_json(t.op.matrix())}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : spec.edges) edges.push_back({e.a, e.b});
  nlohmann::json j{{"n", spec.n}, {"d", spec.d}, {"terms", terms}, {"b", spec.field}, {"edges", edges}};
  if (!spec.generators.empty()) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& o : spec.generators) g.push_back(qcore::matrix_to_json(o.matrix()));
    j["generators"] = g;
  }
  return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    s.n = j.at("n").get<int>();
    s.d = j.at("d").get<int>();
    for (const auto& t : j.at("terms"))
      s.terms.push_back({t.at("j").get<double>(), Observable(qcore::matrix_from_json(t.at("h")))});
    if (j.contains("b")) s.field = j.at("b").get<std::vector<double>>();
    if (j.contains("generators"))
      for (const auto& g : j.at("generators")) s.generators.emplace_back(qcore::matrix_from_json(g));
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("model JSON: edge must be a pair");
      s.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace spinbound::models
