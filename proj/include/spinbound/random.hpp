#pragma once

#include <cstdint>
#include <random>

#include "spinbound/qcore.hpp"

namespace spinbound {

using Rng = std::mt19937_64;

/// Independent, reproducible sub-seed for task `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

qcore::Vector random_pure_state(int d, Rng& rng);
/// Ginibre-distributed mixed state of full rank (rank = d unless `rank` > 0).
qcore::DensityMatrix random_density(int d, Rng& rng, int rank = 0);
/// Hermitian matrix with i.i.d. Gaussian entries (GUE-like), scaled by `scale`.
qcore::Matrix random_hermitian(int d, Rng& rng, double scale = 1.0);
qcore::Matrix random_unitary(int d, Rng& rng);

}  // namespace spinbound
