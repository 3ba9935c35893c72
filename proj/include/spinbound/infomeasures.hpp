#pragma once

#include <vector>

#include "spinbound/qcore.hpp"

namespace spinbound::info {

using qcore::DensityMatrix;
using qcore::Observable;

enum class Exactness { exact, upper_bound, lower_bound };

struct RoofValue {
  double value = 0.0;
  Exactness exactness = Exactness::exact;
};

/// Two-party state set over which a correlation extremum is taken: separable
/// states with both marginals equal to rho, or the symmetric subset of them.
enum class TwoPartySet { sep, symsep };

const char* to_string(Exactness e);

double variance(const DensityMatrix& rho, const Observable& h);

double qfi(const DensityMatrix& rho, const Observable& h);
/// Same formula evaluated from a precomputed eigendecomposition of rho.
double qfi(const qcore::EigenDecomposition& rho_eig, const Observable& h);

double wy_skew(const DensityMatrix& rho, const Observable& h);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Largest sum of correlations sum_l <h_l x h_l> over separable two-party
/// states with both marginals rho.
RoofValue sep_corr_max(const DensityMatrix& rho, const std::vector<Observable>& hs);

/// Largest <h x h> over all two-qubit states with both marginals rho.
double any_state_corr_max_qubit(const DensityMatrix& rho, const Observable& h);

/// Largest <sum_l j_l x j_l> over separable two-qubit states with marginals rho, sigma.
double sep_corr_max_heisenberg(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Smallest sum_l <h_l x h_l> over the chosen two-party set with marginals rho.
RoofValue sym_sep_corr_min(const DensityMatrix& rho, const std::vector<Observable>& hs,
                           TwoPartySet set = TwoPartySet::symsep);

}  // namespace spinbound::info
