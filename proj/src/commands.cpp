#include "spinbound/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spinbound/bounds.hpp"
#include "spinbound/infomeasures.hpp"
#include "spinbound/models.hpp"
#include "spinbound/oracles.hpp"
#include "spinbound/random.hpp"

namespace spinbound::cli {

using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Observable;
using qcore::ValidationError;
using qcore::Vector;

int resolve_threads(int flag) {
  if (const char* env = std::getenv("SPINBOUND_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (flag > 0) return flag;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <class... T>
void csv_line(std::ostream& os, const T&... v) {
  bool first = true;
  auto one = [&](const auto& x) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>)
      os << fmt(x);
    else
      os << x;
  };
  (one(v), ...);
  os << '\n';
}

DensityMatrix site_marginal(const Vector& psi, int n, int d) {
  std::vector<int> dims(n, d);
  const int first[1] = {0};
  return qcore::reduced_state(psi, dims, first);
}

double sq(double x) { return x * x; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<SweepRow> sweep_chain(int n, double j, double bx_min, double bx_max, int steps, int threads) {
  if (n < 2 || n % 2 != 0 || n > 12) throw ValidationError("sweep-chain: n must be even and at most 12");
  if (steps < 1) throw ValidationError("sweep-chain: steps must be positive");
  if (!(j > 0.0)) throw ValidationError("sweep-chain: j must be positive");
  if (bx_max < bx_min) throw ValidationError("sweep-chain: bx-max is below bx-min");
  const Observable sx = qcore::pauli()[0];
  return parallel_map<SweepRow>(steps, threads, [&](int i) {
    const double bx = steps == 1 ? bx_min : bx_min + (bx_max - bx_min) * i / (steps - 1);
    const auto gs = oracles::ground_state(models::build_hamiltonian(models::ising_ring(n, j, bx)));
    const auto rho = site_marginal(gs.state, n, 2);
    const auto chain = bounds::ising_chain(n, j, bx);
    const double s = qcore::expect(rho, sx);
    SweepRow r{};
    r.bx = bx;
    r.jx_expect = n * s / 2.0;
    r.e_ground = gs.energy;
    r.e_sep_qfi = bounds::e_sep_chain(rho, chain);
    r.e_lower_wy = bounds::e_lower_wy(rho, chain);
    r.corr_ground = gs.energy + n * bx * s;
    r.corr_sep = r.e_sep_qfi + n * bx * s;
    r.corr_wy = r.e_lower_wy + n * bx * s;
    return r;
  });
}

std::vector<double> qfi_grid(int n, double j, int steps, double bx_max) {
  if (steps < 1) throw ValidationError("qfi-bound: steps must be positive");
  if (bx_max <= 0.0) bx_max = 1.2 * n * j / 4.0;
  std::vector<double> g;
  for (int i = 1; i <= steps; ++i) g.push_back(i * bx_max / steps);
  return g;
}

std::vector<QfiRow> qfi_bound_rows(const std::vector<int>& ns, double j, int steps, double bx_max, int threads) {
  if (!(j > 0.0)) throw ValidationError("qfi-bound: j must be positive");
  std::vector<std::pair<int, double>> tasks;
  for (int n : ns) {
    if (n < 2) throw ValidationError("qfi-bound: n must be at least 2");
    for (double bx : qfi_grid(n, j, steps, bx_max)) tasks.emplace_back(n, bx);
  }
  return parallel_map<QfiRow>(static_cast<int>(tasks.size()), threads, [&](int i) {
    const auto [n, bx] = tasks[i];
    const auto p = bounds::collective_qfi_point(n, j, bx);
    return QfiRow{n, bx, p.sx, p.fq, p.bound, p.delta, 8.0 / n, 0.6 / n};
  });
}

std::vector<KprodRow> kprod_rows(int n, const std::vector<int>& ks, double jx0, double j, int threads) {
  if (n < 2) throw ValidationError("kprod: n must be at least 2");
  if (!(jx0 >= 0.0 && jx0 < 1.0)) throw ValidationError("kprod: jx0 must lie in [0, 1)");
  for (int k : ks)
    if (k < 1 || n % k != 0) throw ValidationError("kprod: every k must divide n");
  const auto rho = DensityMatrix::from_bloch(jx0, 0.0, 0.0);
  const auto chain = bounds::ising_chain(n, j, 0.0);
  const double pfeuty = bounds::pfeuty_fixed_magnetization(j, jx0).energy;
  return parallel_map<KprodRow>(static_cast<int>(ks.size()), threads, [&](int i) {
    const int k = ks[i];
    KprodRow r{};
    r.k = k;
    r.bound_qfi = bounds::kprod_bound(rho, k, chain, bounds::KprodMode::single_marginal);
    r.bound_product = bounds::kprod_bound(rho, k, chain, bounds::KprodMode::product_blocks);
    r.bound_qfi_per_particle = r.bound_qfi / n;
    r.bound_product_per_particle = r.bound_product / n;
    r.bound_wy_per_particle = bounds::kprod_bound(rho, k, chain, bounds::KprodMode::wy_blocks) / n;
    r.pfeuty_reference = pfeuty;
    return r;
  });
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "bx,jx_expect,e_ground,e_sep_qfi,e_lower_wy,corr_ground,corr_sep,corr_wy\n";
  for (const auto& r : rows)
    csv_line(os, r.bx, r.jx_expect, r.e_ground, r.e_sep_qfi, r.e_lower_wy, r.corr_ground, r.corr_sep, r.corr_wy);
}

void write_csv(std::ostream& os, const std::vector<QfiRow>& rows) {
  os << "n,bx,sx_expect,fq_true,fq_bound,delta,cap_8_over_n,cap_0p6_over_n\n";
  for (const auto& r : rows)
    csv_line(os, r.n, r.bx, r.sx_expect, r.fq_true, r.fq_bound, r.delta, r.cap_8_over_n, r.cap_0p6_over_n);
}

void write_csv(std::ostream& os, const std::vector<KprodRow>& rows) {
  os << "k,bound_qfi,bound_product,bound_qfi_per_particle,bound_product_per_particle,bound_wy_per_particle,"
        "pfeuty_reference\n";
  for (const auto& r : rows)
    csv_line(os, r.k, r.bound_qfi, r.bound_product, r.bound_qfi_per_particle, r.bound_product_per_particle,
             r.bound_wy_per_particle, r.pfeuty_reference);
}

// ---------------------------------------------------------------------------
// verification suites

namespace {

struct Trial {
  bool pass = true;
  double err = 0.0;
};

oracles::OptimizerConfig trial_config(std::uint64_t seed) {
  oracles::OptimizerConfig cfg;
  cfg.seed = seed;
  return cfg;
}

double corr_closed_form(const DensityMatrix& rho, const Observable& h) {
  return qcore::expect(rho.matrix(), h.matrix() * h.matrix()) - info::qfi(rho, h) / 4.0;
}

Trial tables_trial(std::uint64_t seed, int index) {
  Rng rng(seed);
  const int d = index % 6 == 5 ? 3 : 2;
  const auto rho = random_density(d, rng);
  const Observable h(random_hermitian(d, rng));
  Trial t;
  const auto rm = oracles::roof_max(rho, {h}, trial_config(seed));
  const double cf = corr_closed_form(rho, h);
  t.err = std::abs(rm.value - cf);
  t.pass = rm.converged && t.err <= 1e-4 && rm.value <= cf + 1e-9;
  if (d == 2) {
    const auto any = oracles::any_state_opt(rho, rho, qcore::tensor(h, h), oracles::Direction::maximize,
                                            trial_config(seed + 1));
    const double e = std::abs(any.value - info::any_state_corr_max_qubit(rho, h));
    t.err = std::max(t.err, e);
    t.pass = t.pass && any.converged && e <= 1e-3;
  }
  return t;
}

Trial roofs_trial(std::uint64_t seed, int index) {
  Rng rng(seed);
  const int d = index % 4 == 3 ? 3 : 2;
  const int L = 1 + index % 3;
  const auto rho = random_density(d, rng);
  std::vector<Observable> hs;
  for (int l = 0; l < L; ++l) hs.emplace_back(random_hermitian(d, rng));
  double local = 0.0;
  for (const auto& h : hs) local += sq(qcore::expect(rho, h));
  const auto rm = oracles::roof_min(rho, hs, trial_config(seed));
  Trial t;
  if (L <= 2) {
    t.err = std::abs(rm.value - local);
    t.pass = rm.converged && t.err <= 1e-4;
  } else {
    t.err = std::max(0.0, local - rm.value);
    t.pass = rm.converged && t.err <= 1e-4;
  }
  return t;
}

Observable heisenberg_pair() {
  Matrix m = Matrix::Zero(4, 4);
  for (const auto& j : qcore::spin_matrices(0.5)) m += qcore::tensor(j.matrix(), j.matrix());
  return Observable(m);
}

Trial fidelity_trial(std::uint64_t seed, int) {
  Rng rng(seed);
  const auto rho = random_density(2, rng), sigma = random_density(2, rng);
  const auto r = oracles::sep_couple_opt(rho, sigma, heisenberg_pair(), oracles::Direction::maximize,
                                         trial_config(seed));
  Trial t;
  t.err = std::abs(r.value - (info::fidelity(rho, sigma) / 2.0 - 0.25));
  t.pass = r.converged && t.err <= 1e-3 && r.feasibility_residual <= 1e-6;
  return t;
}

Trial saturation_trial(std::uint64_t seed, int index) {
  Rng rng(seed);
  const auto rho = random_density(2, rng);
  const Observable h(random_hermitian(2, rng));
  const auto decomposition = oracles::roof_max(rho, {h}, trial_config(seed));
  Trial t;
  const int geometry = index % 6;
  double lhs = 0.0, rhs = 0.0;
  if (geometry < 3) {
    const auto graph = geometry == 0   ? models::lattice_edges({4}, true)
                       : geometry == 1 ? models::lattice_edges({6}, true)
                                       : models::lattice_edges({2, 4}, true);
    models::ModelSpec spec;
    spec.n = geometry == 0 ? 4 : geometry == 1 ? 6 : 8;
    spec.d = 2;
    spec.terms = {{-1.0, h}};
    std::normal_distribution<double> normal;
    spec.field = {normal(rng), normal(rng), normal(rng)};
    spec.generators = qcore::pauli();
    spec.edges = graph.edges;
    const auto pair = decomposition.ensemble.replicate(2);
    lhs = oracles::saturating_chain_state(pair, spec, *graph.coloring);
    rhs = spec.pair_count() * qcore::expect(pair.assemble(), models::two_body_hamiltonian(spec).matrix());
  } else {
    const int n = geometry == 3 ? 3 : geometry == 4 ? 4 : 10;
    const Observable h_ab(random_hermitian(4, rng));
    std::vector<Vector> states;
    for (const auto& c : decomposition.ensemble.locals) states.push_back(c.front());
    lhs = oracles::symmetric_extension_value(decomposition.ensemble.weights, states, n, h_ab);
    const auto pair = decomposition.ensemble.replicate(2);
    rhs = n * (n - 1) / 2.0 * qcore::expect(pair.assemble(), h_ab.matrix());
  }
  t.err = std::abs(lhs - rhs);
  t.pass = decomposition.converged && t.err <= 1e-12;
  return t;
}

oracles::ProductEnsemble random_product_ensemble(Rng& rng, int components, bool symmetric) {
  oracles::ProductEnsemble e;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    const double w = u(rng) + 1e-3;
    e.weights.push_back(w);
    total += w;
    const Vector a = random_pure_state(2, rng);
    e.locals.push_back({a, symmetric ? a : random_pure_state(2, rng)});
  }
  for (auto& w : e.weights) w /= total;
  return e;
}

/// cos(theta)|00> + sin(theta)|11> at theta = pi/8, h = sigma_x / 2.
bounds::WitnessReport entangled_reference() {
  const double th = std::numbers::pi / 8.0;
  Vector psi = Vector::Zero(4);
  psi(0) = std::cos(th);
  psi(3) = std::sin(th);
  return bounds::witness_corr_qfi(DensityMatrix::pure(psi), qcore::spin_matrices(0.5)[0]);
}

Trial witnesses_trial(std::uint64_t seed, int index) {
  Rng rng(seed);
  const Matrix flip = qcore::flip_operator(2).matrix();
  const Observable h1(random_hermitian(2, rng)), h2(random_hermitian(2, rng));
  std::uniform_int_distribution<int> size(1, 6);
  const Matrix gamma = random_product_ensemble(rng, size(rng), false).assemble();
  const DensityMatrix matched(0.5 * (gamma + flip * gamma * flip));
  const DensityMatrix bosonic(random_product_ensemble(rng, size(rng), true).assemble());

  Trial t;
  auto check = [&](const bounds::WitnessReport& w) {
    if (w.violated) t.pass = false;
    if (w.applicable) t.err = std::max(t.err, std::max(0.0, w.lhs - w.rhs));
  };
  check(bounds::witness_corr_qfi(matched, h1));
  check(bounds::witness_fidelity_corr(matched));
  check(bounds::witness_fidelity_corr(DensityMatrix(gamma)));
  check(bounds::witness_sym_two_sided(bosonic, h1));
  check(bounds::witness_sym_two_ops(bosonic, h1, h2));
  if (index == 0) {
    const auto w = entangled_reference();
    t.pass = t.pass && w.violated && w.lhs - w.rhs >= 0.05;
  }
  return t;
}

using TrialFn = Trial (*)(std::uint64_t, int);

TrialFn suite_fn(const std::string& suite) {
  if (suite == "tables") return tables_trial;
  if (suite == "roofs") return roofs_trial;
  if (suite == "fidelity") return fidelity_trial;
  if (suite == "saturation") return saturation_trial;
  if (suite == "witnesses") return witnesses_trial;
  throw ValidationError("unknown suite: " + suite);
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"tables", "roofs", "fidelity", "saturation", "witnesses"};
  return s;
}

nlohmann::json to_json(const VerifyReport& r) {
  return {{"suite", r.suite},   {"trials", r.trials},           {"passed", r.passed},
          {"failed", r.failed}, {"worst_abs_err", r.worst_abs_err}, {"seed", r.seed}};
}

VerifyReport verify(const std::string& suite, std::uint64_t seed, int trials, int threads) {
  const TrialFn fn = suite_fn(suite);
  if (trials < 1) throw ValidationError("verify: trials must be positive");
  const auto results = parallel_map<Trial>(trials, threads, [&](int i) {
    try {
      return fn(derive_seed(seed, static_cast<std::uint64_t>(i)), i);
    } catch (const qcore::NonConvergenceError&) {
      return Trial{false, 0.0};
    }
  });
  VerifyReport r;
  r.suite = suite;
  r.trials = trials;
  r.seed = seed;
  for (const auto& t : results) {
    (t.pass ? r.passed : r.failed)++;
    r.worst_abs_err = std::max(r.worst_abs_err, t.err);
  }
  return r;
}

// ---------------------------------------------------------------------------
// command line

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string json_token(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + json_token(x);
    return s;
  }
  return v.dump();
}

// Config keys mirror the long flags. They are spliced in ahead of the user's
// arguments, and a key is skipped when the same flag was given explicitly.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  const auto cfg = read_json_file(*path);
  if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given || flag == "--command") continue;
    extra.push_back(flag);
    extra.push_back(json_token(value));
  }
  std::vector<std::string> out;
  // program name and subcommand come first
  size_t head = std::min<size_t>(2, args.size());
  if (args.size() < 2 && cfg.contains("command")) {
    out.assign(args.begin(), args.end());
    out.push_back(cfg["command"].get<std::string>());
    head = out.size();
  } else {
    out.assign(args.begin(), args.begin() + head);
  }
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + std::min(head, args.size()), args.end());
  return out;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ValidationError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

Observable axis_operator(const std::string& a) {
  const auto j = qcore::spin_matrices(0.5);
  if (a == "x") return j[0];
  if (a == "y") return j[1];
  if (a == "z") return j[2];
  throw ValidationError("axis must be x, y or z");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy bounds for separable and k-producible spin states"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  int threads = 0;
  std::uint64_t seed = 0;
  std::string out_path, config;
  app.add_option("--threads", threads, "Worker threads (SPINBOUND_THREADS overrides)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out_path, "Output file (default stdout)");
  app.add_option("--config", config, "JSON file mirroring the flags; explicit flags win");

  auto* sweep = app.add_subcommand("sweep-chain", "Ising ring ground energy and separable bounds over a field sweep");
  int n = 10, steps = 50;
  double j = 1.0, bx_min = 0.0, bx_max = 2.0;
  sweep->add_option("--n", n, "Ring length (even, <= 12)");
  sweep->add_option("--j", j, "Coupling");
  sweep->add_option("--bx-min", bx_min);
  sweep->add_option("--bx-max", bx_max);
  sweep->add_option("--steps", steps);

  auto* qfi = app.add_subcommand("qfi-bound", "Fisher information bound from the collective ground state");
  std::vector<int> ns = {4, 10, 60};
  int qfi_steps = 30;
  double qfi_j = 1.0, qfi_bx_max = 0.0;
  qfi->add_option("--n", ns, "Particle numbers")->delimiter(',');
  qfi->add_option("--j", qfi_j);
  qfi->add_option("--steps", qfi_steps);
  qfi->add_option("--bx-max", qfi_bx_max, "Largest field (default 1.2 N J / 4)");

  auto* kprod = app.add_subcommand("kprod", "k-producible energy bounds for the zero-field Ising chain");
  int kn = 10;
  std::vector<int> ks = {1, 2, 5};
  double jx0 = 0.1, kj = 1.0;
  kprod->add_option("--n", kn);
  kprod->add_option("--k", ks, "Block sizes")->delimiter(',');
  kprod->add_option("--jx0", jx0, "<sigma_x> of the marginal");
  kprod->add_option("--j", kj);

  auto* ver = app.add_subcommand("verify", "Run a verification suite and print a JSON summary");
  std::string suite;
  int trials = 100;
  ver->add_option("suite", suite, "tables, roofs, fidelity, saturation or witnesses")->required();
  ver->add_option("--trials", trials);

  auto* rep = app.add_subcommand("report", "Ground state and applicable bounds for a model given as JSON");
  std::string model_path;
  rep->add_option("--model", model_path, "Model description")->required();

  auto* wit = app.add_subcommand("witness", "Evaluate an entanglement criterion on a two-qubit state");
  std::string criterion = "corr_qfi", state_file;
  std::vector<std::string> axes = {"z"};
  wit->add_option("--criterion", criterion);
  wit->add_option("--state-file", state_file, "Two-qubit state as a JSON matrix")->required();
  wit->add_option("--axis", axes, "Spin component(s) for h")->delimiter(',');

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const qcore::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const int workers = resolve_threads(threads);
  try {
    if (*sweep) {
      const auto rows = sweep_chain(n, j, bx_min, bx_max, steps, workers);
      Output o(out_path, out);
      write_csv(o.stream(), rows);
    } else if (*qfi) {
      const auto rows = qfi_bound_rows(ns, qfi_j, qfi_steps, qfi_bx_max, workers);
      Output o(out_path, out);
      write_csv(o.stream(), rows);
    } else if (*kprod) {
      const auto rows = kprod_rows(kn, ks, jx0, kj, workers);
      Output o(out_path, out);
      write_csv(o.stream(), rows);
    } else if (*ver) {
      const auto r = verify(suite, seed, trials, workers);
      Output o(out_path, out);
      o.stream() << to_json(r).dump(2) << '\n';
      return r.failed == 0 ? kOk : kFailed;
    } else if (*rep) {
      const auto spec = models::spec_from_json(read_json_file(model_path));
      const auto r = bounds::make_report(spec);
      Output o(out_path, out);
      o.stream() << bounds::report_to_json(r).dump(2) << '\n';
    } else if (*wit) {
      const DensityMatrix rho(qcore::matrix_from_json(read_json_file(state_file)));
      bounds::WitnessInputs in;
      in.rho_ab = rho;
      const auto c = bounds::criterion_from_string(criterion);
      if (c != bounds::Criterion::fidelity_corr)
        for (const auto& a : axes) in.hs.push_back(axis_operator(a));
      const auto w = bounds::witness(c, in);
      nlohmann::json jw = {{"criterion", bounds::to_string(w.criterion)},
                           {"lhs", w.lhs},
                           {"rhs", w.rhs},
                           {"lower", w.lower ? nlohmann::json(*w.lower) : nlohmann::json(nullptr)},
                           {"applicable", w.applicable},
                           {"violated", w.violated}};
      Output o(out_path, out);
      o.stream() << jw.dump(2) << '\n';
    }
  } catch (const qcore::NonConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const qcore::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace spinbound::cli
