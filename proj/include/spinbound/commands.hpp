#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace spinbound::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kNonConvergence = 3 };

/// SPINBOUND_THREADS wins over the flag; 0 means available parallelism.
int resolve_threads(int flag);

/// Evaluates fn(0..count-1) on up to `threads` workers; results keep input order.
template <class T>
std::vector<T> parallel_map(int count, int threads, const std::function<T(int)>& fn);

struct SweepRow {
  double bx, jx_expect, e_ground, e_sep_qfi, e_lower_wy, corr_ground, corr_sep, corr_wy;
};
std::vector<SweepRow> sweep_chain(int n, double j, double bx_min, double bx_max, int steps, int threads = 1);

struct QfiRow {
  int n;
  double bx, sx_expect, fq_true, fq_bound, delta, cap_8_over_n, cap_0p6_over_n;
};
/// bx_i = i * bx_max / steps for i = 1..steps; bx_max defaults to 1.2 N J / 4, past saturation.
std::vector<double> qfi_grid(int n, double j, int steps, double bx_max = 0.0);
std::vector<QfiRow> qfi_bound_rows(const std::vector<int>& ns, double j, int steps, double bx_max = 0.0,
                                   int threads = 1);

struct KprodRow {
  int k;
  double bound_qfi, bound_product, bound_qfi_per_particle, bound_product_per_particle, bound_wy_per_particle,
      pfeuty_reference;
};
/// Zero-field chain with marginal (I + jx0 sigma_x)/2.
std::vector<KprodRow> kprod_rows(int n, const std::vector<int>& ks, double jx0, double j = 1.0, int threads = 1);

struct VerifyReport {
  std::string suite;
  int trials = 0;
  int passed = 0;
  int failed = 0;
  double worst_abs_err = 0.0;
  std::uint64_t seed = 0;
};
nlohmann::json to_json(const VerifyReport& r);
const std::vector<std::string>& verify_suites();
VerifyReport verify(const std::string& suite, std::uint64_t seed, int trials, int threads = 1);

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_csv(std::ostream& os, const std::vector<QfiRow>& rows);
void write_csv(std::ostream& os, const std::vector<KprodRow>& rows);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------

template <class T>
std::vector<T> parallel_map(int count, int threads, const std::function<T(int)>& fn) {
  std::vector<T> out(count);
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace spinbound::cli
