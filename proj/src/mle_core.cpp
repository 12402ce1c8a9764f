#include "covact/mle_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "covact/errors.hpp"
#include "covact/hermitian.hpp"

namespace covact {

namespace {
// cadence of the from-scratch rebuild of the maintained inverses
constexpr int kRefreshEvery = 500;
// a Sherman-Morrison denominator this small amplifies the accumulated inverse
// error by >100x, so the affected inverse is rebuilt exactly instead
constexpr double kRepairBelow = 1e-2;
}  // namespace

void StatsWorkspace::resize(int cells, int sig_len) {
  v.assign(cells, ComplexVector(sig_len));
  stats.g.assign(cells, 0.0);
  stats.c1.assign(cells, 0.0);
  stats.c2.assign(cells, 0.0);
}

SolverState::SolverState(const Scenario& scn, const ObservationSet& obs)
    : SolverState(scn, obs, ActivityVector(static_cast<std::size_t>(scn.config.coords()), 0.0)) {}

SolverState::SolverState(const Scenario& scn, const ObservationSet& obs, ActivityVector a0)
    : scenario(&scn), observations(&obs), a(std::move(a0)) {
  if (a.size() != static_cast<std::size_t>(scn.config.coords()))
    throw DimensionMismatch("activity vector length does not match B*N");
  if (obs.sample_covs.size() != static_cast<std::size_t>(scn.config.B))
    throw DimensionMismatch("observation set does not cover every BS");
  refresh_inverses();
}

void SolverState::refresh_inverses() {
  inv_covs.clear();
  inv_covs.reserve(scenario->config.B);
  for (int b = 0; b < scenario->config.B; ++b)
    inv_covs.push_back(cholesky_inverse(model_covariance(*scenario, a, b)));
  updates_since_resym = 0;
}

void SolverState::refresh_inverse(int b) {
  inv_covs[static_cast<std::size_t>(b)] =
      cholesky_inverse(model_covariance(*scenario, a, b));
}

void SolverState::apply_update(int j, int n, double new_value, const StatsWorkspace& ws) {
  const std::size_t idx = static_cast<std::size_t>(j) * scenario->config.N + n;
  const double d = new_value - a[idx];
  if (d == 0.0) {
    a[idx] = new_value;
    return;
  }
  const int cells = scenario->config.B;
  // probe every Sherman-Morrison denominator before mutating anything so a
  // degenerate step leaves the state untouched
  for (int b = 0; b < cells; ++b) {
    const double denom = 1.0 + d * ws.stats.g[b] * ws.stats.c1[b];
    if (!(denom > 0.0))
      throw SingularUpdate("rank-one update denominator not positive at BS " +
                           std::to_string(b));
  }
  a[idx] = new_value;
  if (++updates_since_resym >= kRefreshEvery) {
    refresh_inverses();
    return;
  }
  for (int b = 0; b < cells; ++b) {
    const double db = d * ws.stats.g[b];
    if (db == 0.0) continue;
    // a near-cancelling downdate would poison the maintained inverse; rebuild
    // that BS exactly and keep the cheap rank-one path for the rest
    if (1.0 + db * ws.stats.c1[b] < kRepairBelow)
      refresh_inverse(b);
    else
      rank_one_inverse_update_with(inv_covs[b], ws.v[b], ws.stats.c1[b], db);
  }
}

void compute_stats(const SolverState& st, int j, int n, StatsWorkspace& ws) {
  const Scenario& scn = *st.scenario;
  const auto s = scn.signature(j, n);
  const int cells = scn.config.B;
  for (int b = 0; b < cells; ++b) {
    matvec(st.inv_covs[b], s, ws.v[b]);
    ws.stats.g[b] = scn.gain(b, j, n);
    ws.stats.c1[b] = dot_conj(s, ws.v[b]).real();
    ws.stats.c2[b] = quadratic_form(ws.v[b], st.observations->sample_covs[b]);
  }
}

double coordinate_gradient(const SolverState& st, int j, int n, StatsWorkspace& ws) {
  compute_stats(st, j, n, ws);
  double g = 0.0;
  for (std::size_t b = 0; b < ws.stats.g.size(); ++b)
    g += ws.stats.g[b] * (ws.stats.c1[b] - ws.stats.c2[b]);
  return g;
}

double objective(const Scenario& scn, const ObservationSet& obs,
                 std::span<const double> a) {
  const int cells = scn.config.B;
  const int sig_len = scn.config.L;
  std::vector<double> per_bs(cells, 0.0);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < cells; ++b) {
    const ComplexMatrix factor = cholesky_factor(model_covariance(scn, a, b));
    double val = logdet_from_factor(factor);
    // tr(Sigma^-1 SampleCov) one column at a time against the factor
    const ComplexMatrix& sc = obs.sample_covs[b];
    ComplexVector col(sig_len);
    for (int k = 0; k < sig_len; ++k) {
      for (int i = 0; i < sig_len; ++i) col[i] = sc(i, k);
      cholesky_solve_in_place(factor, col);
      val += col[k].real();
    }
    per_bs[b] = val;
  }
  // fixed-order reduction keeps the result independent of the thread count
  return std::accumulate(per_bs.begin(), per_bs.end(), 0.0);
}

double objective(const SolverState& st) {
  return objective(*st.scenario, *st.observations, st.a);
}

void gradient(const SolverState& st, std::span<double> out) {
  const int per_cell = st.scenario->config.N;
  const int total = st.scenario->config.coords();
  if (out.size() != static_cast<std::size_t>(total))
    throw DimensionMismatch("gradient output span has wrong length");
#pragma omp parallel
  {
    StatsWorkspace ws;
    ws.resize(st.scenario->config.B, st.scenario->config.L);
#pragma omp for schedule(static)
    for (int c = 0; c < total; ++c)
      out[c] = coordinate_gradient(st, c / per_cell, c % per_cell, ws);
  }
}

void gradient_serial(const SolverState& st, std::span<double> out) {
  const int per_cell = st.scenario->config.N;
  const int total = st.scenario->config.coords();
  if (out.size() != static_cast<std::size_t>(total))
    throw DimensionMismatch("gradient output span has wrong length");
  StatsWorkspace ws;
  ws.resize(st.scenario->config.B, st.scenario->config.L);
  for (int c = 0; c < total; ++c)
    out[c] = coordinate_gradient(st, c / per_cell, c % per_cell, ws);
}

ActivityVector gradient(const SolverState& st) {
  ActivityVector out(static_cast<std::size_t>(st.scenario->config.coords()));
  gradient(st, out);
  return out;
}

ActivityVector gradient_serial(const SolverState& st) {
  ActivityVector out(static_cast<std::size_t>(st.scenario->config.coords()));
  gradient_serial(st, out);
  return out;
}

double optimality_residual(std::span<const double> a, std::span<const double> grad) {
  if (a.size() != grad.size())
    throw DimensionMismatch("activity and gradient lengths differ");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double proj = std::clamp(a[i] - grad[i], 0.0, 1.0);
    const double diff = proj - a[i];
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

double state_inverse_error(const SolverState& st) {
  const int sig_len = st.scenario->config.L;
  double worst = 0.0;
  for (int b = 0; b < st.scenario->config.B; ++b) {
    const ComplexMatrix cov = model_covariance(*st.scenario, st.a, b);
    const ComplexMatrix& inv = st.inv_covs[b];
    double ss = 0.0;
    for (int i = 0; i < sig_len; ++i) {
      for (int k = 0; k < sig_len; ++k) {
        cxd acc{0.0, 0.0};
        for (int m = 0; m < sig_len; ++m) acc += cov(i, m) * inv(m, k);
        if (i == k) acc -= 1.0;
        ss += std::norm(acc);
      }
    }
    worst = std::max(worst, std::sqrt(ss));
  }
  return worst;
}

}  // namespace covact
