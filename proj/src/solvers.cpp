#include "covact/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "covact/errors.hpp"
#include "covact/subproblem.hpp"

namespace covact {

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

double l2_norm(const std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

// one permuted exact-minimization sweep over the given coordinates
void permuted_pass(SolverState& st, std::vector<int>& coords, Rng& perm_rng,
                   const SolverConfig& cfg, SolverReport& rep, StatsWorkspace& ws) {
  perm_rng.shuffle(coords.begin(), coords.end());
  const int per_cell = st.scenario->config.N;
  const int cells = st.scenario->config.B;
  SubproblemInstance inst;
  inst.gamma.resize(cells);
  inst.beta.resize(cells);
  for (int c : coords) {
    const int j = c / per_cell;
    const int n = c % per_cell;
    const auto t0 = Clock::now();
    compute_stats(st, j, n, ws);
    const auto t1 = Clock::now();
    rep.phase.stats += secs(t0, t1);

    const double a_old = st.at(j, n);
    for (int b = 0; b < cells; ++b) {
      inst.gamma[b] = ws.stats.g[b] * ws.stats.c1[b];
      inst.beta[b] = ws.stats.g[b] * ws.stats.c2[b];
    }
    inst.lower = -a_old;
    inst.upper = 1.0 - a_old;
    SubproblemSolution sol;
    bool solved = true;
    try {
      sol = solve_subproblem(inst);
    } catch (const RootFindingFailure&) {
      solved = false;
    }
    const auto t2 = Clock::now();
    rep.phase.rootfind += secs(t1, t2);
    if (!solved) {
      ++rep.skipped_coordinates;
      continue;
    }

    // endpoint solutions snap to exact 0/1 so the active-set classification
    // can compare against the bounds exactly
    double new_a;
    if (sol.d == inst.lower) {
      new_a = 0.0;
    } else if (sol.d == inst.upper) {
      new_a = 1.0;
    } else {
      new_a = a_old + sol.d;
      if (new_a < 0.0 || new_a > 1.0) {
        if (new_a < -1e-9 || new_a > 1.0 + 1e-9) ++rep.feasibility_clips;
        new_a = std::clamp(new_a, 0.0, 1.0);
      }
    }
    // every nonzero move is applied — withholding sub-threshold moves can
    // park the iterate just outside the termination region permanently; the
    // threshold only decides which counter the coordinate lands in
    const double step = new_a - a_old;
    if (step != 0.0) {
      try {
        st.apply_update(j, n, new_a, ws);
      } catch (const SingularUpdate&) {
        ++rep.skipped_coordinates;
        continue;
      }
      rep.phase.rank_one += secs(t2, Clock::now());
      rep.incremental_objective += sol.value;
    }
    if (std::abs(step) > cfg.update_threshold) {
      ++rep.successful_updates;
      if (cfg.record_fine_trace)
        rep.fine_objective_trace.push_back(rep.incremental_objective);
    } else {
      ++rep.unnecessary_checks;
    }
  }
}

DeltaVector make_delta(const SolverConfig& cfg, int k, std::span<const double> a,
                       std::span<const double> grad, const SolverState& st,
                       SolverReport& rep) {
  switch (cfg.delta_schedule) {
    case DeltaScheduleKind::Zero:
      return DeltaVector(a.size(), 0.0);
    case DeltaScheduleKind::Custom:
      return DeltaVector(a.size(), cfg.custom_delta);
    case DeltaScheduleKind::Paper:
      break;
  }
  return delta_schedule_paper(k, a, grad, cfg.epsilon, st.scenario->config.B,
                              st.scenario->config.N, &rep.empty_class_triggers);
}

}  // namespace

DeltaVector delta_schedule_paper(int k, std::span<const double> a,
                                 std::span<const double> grad, double epsilon,
                                 int cells, int per_cell,
                                 std::int64_t* empty_class_triggers) {
  if (a.size() != grad.size())
    throw DimensionMismatch("activity and gradient lengths differ");
  double max_zero = 0.0;
  double max_one = 0.0;
  bool any_zero = false;
  bool any_one = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      any_zero = true;
      max_zero = std::max(max_zero, std::abs(grad[i]));
    } else if (a[i] == 1.0) {
      any_one = true;
      max_one = std::max(max_one, std::abs(grad[i]));
    }
  }
  // an empty boundary class leaves its max at 0 — the permissive default;
  // note it so traces show when the convention was in effect
  if (empty_class_triggers != nullptr && (!any_zero || !any_one))
    ++*empty_class_triggers;
  const double boundary_scale = std::pow(10.0, -(k + 2));
  const double interior =
      std::max(std::pow(5.0, -k),
               epsilon / std::sqrt(0.3 * static_cast<double>(cells) * per_cell));
  DeltaVector delta(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0)
      delta[i] = boundary_scale * max_zero;
    else if (a[i] == 1.0)
      delta[i] = boundary_scale * max_one;
    else
      delta[i] = interior;
  }
  return delta;
}

std::vector<int> select_active_set(std::span<const double> a,
                                   std::span<const double> grad,
                                   const DeltaVector& delta) {
  if (a.size() != grad.size() || a.size() != delta.size())
    throw DimensionMismatch("selection input lengths differ");
  std::vector<int> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      if (grad[i] < -delta[i]) out.push_back(static_cast<int>(i));
    } else if (a[i] == 1.0) {
      if (grad[i] > delta[i]) out.push_back(static_cast<int>(i));
    } else if (std::abs(grad[i]) > delta[i]) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

SolveResult random_cd(SolverState& st, const SolverConfig& cfg) {
  const auto t_start = Clock::now();
  SolverReport rep;
  StatsWorkspace ws;
  ws.resize(st.scenario->config.B, st.scenario->config.L);
  Rng perm_rng = Rng(cfg.seed).substream(Stream::Permutations);
  std::vector<int> coords(st.scenario->config.coords());
  std::iota(coords.begin(), coords.end(), 0);

  rep.incremental_objective = objective(st);
  if (cfg.record_objective_trace) rep.objective_trace.push_back(rep.incremental_objective);
  if (cfg.record_fine_trace) rep.fine_objective_trace.push_back(rep.incremental_objective);

  ActivityVector grad(coords.size());
  for (int k = 0; k < cfg.max_outer_iters; ++k) {
    permuted_pass(st, coords, perm_rng, cfg, rep, ws);
    rep.iterations = k + 1;
    const auto tg = Clock::now();
    gradient(st, grad);
    rep.phase.gradient += secs(tg, Clock::now());
    const double res = optimality_residual(st.a, grad);
    rep.residual_trace.push_back(res);
    if (cfg.record_objective_trace) rep.objective_trace.push_back(objective(st));
    rep.final_residual = res;
    if (res < cfg.epsilon) {
      rep.terminated_by = Termination::Residual;
      break;
    }
    rep.terminated_by = Termination::IterCap;
  }
  rep.wall_time_total = secs(t_start, Clock::now());
  return {st.a, rep};
}

SolveResult random_cd(const Scenario& scn, const ObservationSet& obs,
                      const SolverConfig& cfg) {
  SolverState st(scn, obs);
  return random_cd(st, cfg);
}

SolveResult active_set_cd(SolverState& st, const SolverConfig& cfg) {
  const auto t_start = Clock::now();
  SolverReport rep;
  StatsWorkspace ws;
  ws.resize(st.scenario->config.B, st.scenario->config.L);
  Rng perm_rng = Rng(cfg.seed).substream(Stream::Permutations);

  rep.incremental_objective = objective(st);
  if (cfg.record_objective_trace) rep.objective_trace.push_back(rep.incremental_objective);
  if (cfg.record_fine_trace) rep.fine_objective_trace.push_back(rep.incremental_objective);

  ActivityVector grad(static_cast<std::size_t>(st.scenario->config.coords()));
  for (int k = 0;; ++k) {
    const auto tg = Clock::now();
    gradient(st, grad);
    rep.phase.gradient += secs(tg, Clock::now());
    const double res = optimality_residual(st.a, grad);
    rep.residual_trace.push_back(res);
    if (cfg.record_objective_trace && k > 0) rep.objective_trace.push_back(objective(st));
    rep.final_residual = res;
    if (res < cfg.epsilon) {
      // nothing is selected at the terminating iteration
      rep.active_set_sizes.push_back(0);
      rep.terminated_by = Termination::Residual;
      break;
    }
    if (k >= cfg.max_outer_iters) {
      rep.terminated_by = Termination::IterCap;
      break;
    }
    DeltaVector delta = make_delta(cfg, k, st.a, grad, st, rep);
    double delta_norm = l2_norm(delta);
    // finite termination rests on ||delta^k|| never growing; the three-case
    // schedule can overshoot when coordinates migrate between classes, so an
    // oversized vector is scaled back onto the previous norm and the event
    // is counted
    if (cfg.delta_schedule == DeltaScheduleKind::Paper &&
        !rep.delta_norms.empty() && delta_norm > rep.delta_norms.back()) {
      ++rep.schedule_violations;
      const double scale = rep.delta_norms.back() / delta_norm;
      for (double& x : delta) x *= scale;
      delta_norm = rep.delta_norms.back();
    }
    rep.delta_norms.push_back(delta_norm);
    std::vector<int> selected = select_active_set(st.a, grad, delta);
    rep.active_set_sizes.push_back(selected.size());
    permuted_pass(st, selected, perm_rng, cfg, rep, ws);
    rep.iterations = k + 1;
  }
  rep.wall_time_total = secs(t_start, Clock::now());
  return {st.a, rep};
}

SolveResult active_set_cd(const Scenario& scn, const ObservationSet& obs,
                          const SolverConfig& cfg) {
  SolverState st(scn, obs);
  return active_set_cd(st, cfg);
}

}  // namespace covact
