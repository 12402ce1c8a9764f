// Core quantities of the covariance-based activity MLE: solver state with
// incrementally maintained inverse covariances, the objective, per-coordinate
// curvature statistics, and the gradient (parallel kernel plus a serial
// reference that produces bitwise-identical entries).
#pragma once

#include <span>
#include <vector>

#include "covact/complex_matrix.hpp"
#include "covact/scenario.hpp"

namespace covact {

using ActivityVector = std::vector<double>;

// per-coordinate statistics across all base stations, for one device (j, n):
//   g[b]  = gain of device (j, n) toward BS b
//   c1[b] = s^H Sigma_b^-1 s
//   c2[b] = s^H Sigma_b^-1 SampleCov_b Sigma_b^-1 s
struct CoordinateStats {
  std::vector<double> g;
  std::vector<double> c1;
  std::vector<double> c2;
};

// scratch reused across coordinates; v[b] = Sigma_b^-1 s is kept so an accepted
// step can refresh the inverse without another matrix-vector product
struct StatsWorkspace {
  std::vector<ComplexVector> v;
  CoordinateStats stats;
  void resize(int cells, int sig_len);
};

struct SolverState {
  const Scenario* scenario = nullptr;
  const ObservationSet* observations = nullptr;
  ActivityVector a;
  std::vector<ComplexMatrix> inv_covs;  // Sigma_b(a)^-1, rank-one maintained
  int updates_since_resym = 0;

  SolverState() = default;
  // starts from a0 (all-zero activity if omitted) with fresh inverses
  SolverState(const Scenario& scn, const ObservationSet& obs);
  SolverState(const Scenario& scn, const ObservationSet& obs, ActivityVector a0);

  double at(int j, int n) const {
    return a[static_cast<std::size_t>(j) * scenario->config.N + n];
  }

  // rebuild every inverse from the current activity vector
  void refresh_inverses();

  // rebuild the inverse of a single BS from the current activity vector
  void refresh_inverse(int b);

  // move coordinate (j, n) to new_value and refresh all inverses through
  // Sherman-Morrison; ws must hold compute_stats output for this coordinate.
  // All update denominators are checked before any inverse is touched.
  void apply_update(int j, int n, double new_value, const StatsWorkspace& ws);
};

void compute_stats(const SolverState& st, int j, int n, StatsWorkspace& ws);

// gradient entry for coordinate (j, n): sum_b g[b] * (c1[b] - c2[b]);
// fills ws as a side effect
double coordinate_gradient(const SolverState& st, int j, int n, StatsWorkspace& ws);

// negative log-likelihood (up to constants), rebuilt from scratch:
// sum_b [ log det Sigma_b(a) + tr(Sigma_b(a)^-1 SampleCov_b) ]
double objective(const Scenario& scn, const ObservationSet& obs,
                 std::span<const double> a);
double objective(const SolverState& st);

// full gradient over all B*N coordinates, flat j*N + n
void gradient(const SolverState& st, std::span<double> out);
void gradient_serial(const SolverState& st, std::span<double> out);
ActivityVector gradient(const SolverState& st);
ActivityVector gradient_serial(const SolverState& st);

// || Proj_[0,1](a - grad) - a ||_2, the first-order optimality residual
double optimality_residual(std::span<const double> a, std::span<const double> grad);

// max_b || Sigma_b(a) * inv_covs[b] - I ||_F, a drift diagnostic for the
// incrementally maintained inverses
double state_inverse_error(const SolverState& st);

}  // namespace covact
