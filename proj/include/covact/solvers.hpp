// The two activity detectors: random permuted coordinate descent and the
// accelerated active-set variant, sharing one permuted-pass core that exactly
// minimizes each selected coordinate and maintains the inverses rank-one.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covact/mle_core.hpp"

namespace covact {

enum class DeltaScheduleKind {
  Paper,   // the three-case schedule driven by iteration index and gradient maxima
  Zero,    // delta = 0: select every strictly violating coordinate
  Custom,  // constant delta = SolverConfig::custom_delta
};

struct SolverConfig {
  double epsilon = 1e-3;            // termination tolerance on the residual
  int max_outer_iters = 500;        // safety cap, reported when hit
  double update_threshold = 1e-12;  // |step| above this counts as an update
  std::uint64_t seed = 1;           // permutation substream seed
  DeltaScheduleKind delta_schedule = DeltaScheduleKind::Paper;
  double custom_delta = 0.0;
  bool record_objective_trace = true;  // from-scratch objective per iteration
  bool record_fine_trace = false;      // incremental objective per update
};

enum class Termination { Residual, IterCap };

struct PhaseTimes {
  double stats = 0.0;     // per-coordinate c1/c2 computation
  double rootfind = 0.0;  // subproblem solves
  double rank_one = 0.0;  // inverse maintenance
  double gradient = 0.0;  // full-gradient sweeps
};

struct SolverReport {
  int iterations = 0;  // completed coordinate passes
  double final_residual = 0.0;
  Termination terminated_by = Termination::IterCap;
  std::vector<double> objective_trace;  // from-scratch, one per pass boundary
  std::vector<double> residual_trace;
  std::vector<std::size_t> active_set_sizes;  // active-set solver only
  std::vector<double> delta_norms;            // ||delta^k||_2 per selection
  std::int64_t successful_updates = 0;
  std::int64_t unnecessary_checks = 0;   // solved subproblems with |step| <= threshold
  std::int64_t skipped_coordinates = 0;  // root-finding or update failures
  std::int64_t empty_class_triggers = 0;
  // finite-termination hypothesis watch: times the three-case schedule
  // produced a ||delta^k|| above its predecessor and was scaled back
  std::int64_t schedule_violations = 0;
  std::int64_t feasibility_clips = 0;  // pre-clamp iterate left [0,1] by > 1e-9
  double incremental_objective = 0.0;  // f(a0) + sum of accepted phi(d*)
  std::vector<double> fine_objective_trace;  // per accepted update, if enabled
  double wall_time_total = 0.0;
  PhaseTimes phase;
};

struct SolveResult {
  ActivityVector a;
  SolverReport report;
};

using DeltaVector = std::vector<double>;

// the three-case threshold schedule: boundary classes scale their own gradient
// maximum by 10^{-k-2}; interior coordinates get max{5^{-k}, eps/sqrt(0.3 B N)}.
// An empty boundary class defaults its max to 0 (the permissive choice) and
// bumps *empty_class_triggers when provided.
DeltaVector delta_schedule_paper(int k, std::span<const double> a,
                                 std::span<const double> grad, double epsilon,
                                 int cells, int per_cell,
                                 std::int64_t* empty_class_triggers = nullptr);

// flat coordinate indices violating first-order optimality beyond delta:
//   {a=0, grad < -delta} u {a=1, grad > delta} u {0<a<1, |grad| > delta}
std::vector<int> select_active_set(std::span<const double> a,
                                   std::span<const double> grad,
                                   const DeltaVector& delta);

// random permuted CD: full passes over a freshly shuffled coordinate order
// until the optimality residual drops below epsilon. The state must start at
// a = 0 to match the algorithm's initialization (the wrapper guarantees it).
SolveResult random_cd(SolverState& st, const SolverConfig& cfg);
SolveResult random_cd(const Scenario& scn, const ObservationSet& obs,
                      const SolverConfig& cfg);

// active-set CD: one gradient per outer iteration drives the residual check,
// the delta schedule and the selection; only selected coordinates are passed
// over. The terminating iteration selects nothing and records |A| = 0.
SolveResult active_set_cd(SolverState& st, const SolverConfig& cfg);
SolveResult active_set_cd(const Scenario& scn, const ObservationSet& obs,
                          const SolverConfig& cfg);

}  // namespace covact
