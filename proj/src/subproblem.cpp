#include "covact/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "covact/errors.hpp"

namespace covact {

namespace {

constexpr double kTieTol = 1e-12;       // phi-value tie band for argmin breaking
constexpr double kImagTol = 1e-8;       // |Im| < tol*(1+|Re|) counts as real
constexpr double kDeflateTol = 1e-300;  // leading-coefficient underflow guard

bool domain_ok(const SubproblemInstance& inst, double d) {
  for (double g : inst.gamma)
    if (1.0 + d * g <= 0.0) return false;
  return true;
}

double second_derivative(const SubproblemInstance& inst, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.gamma.size(); ++j) {
    const double t = 1.0 + d * inst.gamma[j];
    const double g = inst.gamma[j];
    acc += -g * g / (t * t) + 2.0 * inst.beta[j] * g / (t * t * t);
  }
  return acc;
}

// c = a * b (polynomial product, ascending coefficients)
std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) c[i + k] += a[i] * b[k];
  return c;
}

// Diagonal similarity transform with powers of two equalizing row and column
// norms (Parlett-Reinsch). Eigenvalues are preserved exactly; the scaling is
// what keeps eigenvalues of badly graded matrices accurate.
void balance_in_place(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  constexpr double kRadix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kRadix * kRadix;
      }
      g = r * kRadix;
      while (c > g) {
        f /= kRadix;
        c /= kRadix * kRadix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) *= g;
        for (Eigen::Index j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// up to three Newton steps on phi' to recover precision the companion
// eigenvalues lose when coefficients span many orders of magnitude
double polish_root(const SubproblemInstance& inst, double r) {
  double fp = subproblem_derivative(inst, r);
  for (int it = 0; it < 3; ++it) {
    const double fpp = second_derivative(inst, r);
    if (!(std::abs(fpp) > 0.0) || !std::isfinite(fpp)) break;
    const double next = r - fp / fpp;
    if (!(next > inst.lower) || !(next < inst.upper) || !domain_ok(inst, next)) break;
    const double fp_next = subproblem_derivative(inst, next);
    if (!(std::abs(fp_next) < std::abs(fp))) break;
    r = next;
    fp = fp_next;
  }
  return r;
}

}  // namespace

double subproblem_value(const SubproblemInstance& inst, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.gamma.size(); ++j) {
    const double t = d * inst.gamma[j];
    if (1.0 + t <= 0.0)
      throw DomainViolation("subproblem log domain violated at d = " + std::to_string(d));
    acc += std::log1p(t) - d * inst.beta[j] / (1.0 + t);
  }
  return acc;
}

double subproblem_derivative(const SubproblemInstance& inst, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.gamma.size(); ++j) {
    const double t = 1.0 + d * inst.gamma[j];
    acc += inst.gamma[j] / t - inst.beta[j] / (t * t);
  }
  return acc;
}

std::vector<double> derivative_poly(const SubproblemInstance& inst) {
  const std::size_t cells = inst.gamma.size();
  std::vector<double> out(2 * cells, 0.0);
  for (std::size_t j = 0; j < cells; ++j) {
    // prod_{i != j} (1 + d*gamma[i]), built by repeated convolution
    std::vector<double> prod{1.0};
    for (std::size_t i = 0; i < cells; ++i)
      if (i != j) prod = conv(prod, {1.0, inst.gamma[i]});
    std::vector<double> sq = conv(prod, prod);
    // gamma[j]*(1 + d*gamma[j]) - beta[j]  =  (gamma - beta) + gamma^2 d
    const std::vector<double> term =
        conv(sq, {inst.gamma[j] - inst.beta[j], inst.gamma[j] * inst.gamma[j]});
    for (std::size_t i = 0; i < term.size(); ++i) out[i] += term[i];
  }
  return out;
}

SubproblemSolution solve_subproblem(const SubproblemInstance& inst) {
  if (inst.gamma.size() != inst.beta.size())
    throw DimensionMismatch("gamma and beta lengths differ");
  if (!(inst.lower <= 0.0) || !(inst.upper >= 0.0))
    throw DomainViolation("subproblem interval must contain 0");

  // single-cell closed form: phi'(d) = 0 at d = (beta - gamma) / gamma^2 and
  // phi is unimodal, so the clamped root is the global minimizer
  if (inst.gamma.size() == 1 && inst.gamma[0] > 0.0) {
    const double g = inst.gamma[0];
    const double d =
        std::clamp((inst.beta[0] - g) / (g * g), inst.lower, inst.upper);
    return {d, subproblem_value(inst, d)};
  }

  std::vector<double> coeffs = derivative_poly(inst);
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  while (coeffs.size() > 1 && std::abs(coeffs.back()) < kDeflateTol * scale)
    coeffs.pop_back();

  std::vector<double> roots;
  if (scale > 0.0 && coeffs.size() > 1) {
    const std::size_t deg = coeffs.size() - 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (std::size_t i = 0; i + 1 < deg; ++i) companion(i + 1, i) = 1.0;
    for (std::size_t i = 0; i < deg; ++i)
      companion(i, deg - 1) = -coeffs[i] / coeffs.back();
    // The couplings span many orders of magnitude, so the companion matrix is
    // badly graded and the QR iteration alone loses the small roots -- the
    // ones the solver usually needs. Balancing restores them.
    balance_in_place(companion);
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    if (es.info() != Eigen::Success)
      throw RootFindingFailure("companion eigenvalue iteration did not converge");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const auto ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) >= kImagTol * (1.0 + std::abs(ev.real()))) continue;
      double r = ev.real();
      if (!(r > inst.lower) || !(r < inst.upper) || !domain_ok(inst, r)) continue;
      roots.push_back(polish_root(inst, r));
    }
  }

  // argmin over roots, both endpoints and the no-move point d = 0
  struct Candidate {
    double d;
    double value;
    int kind;  // 0 = lower endpoint, 1 = upper endpoint, 2 = root, 3 = origin
  };
  std::vector<Candidate> cands;
  const auto consider = [&](double d, int kind) {
    if (!domain_ok(inst, d)) return;  // only reachable through rounding
    cands.push_back({d, subproblem_value(inst, d), kind});
  };
  consider(inst.lower, 0);
  consider(inst.upper, 1);
  consider(0.0, 3);
  for (double r : roots) consider(r, 2);
  if (cands.empty())
    throw RootFindingFailure("no feasible candidate in the subproblem interval");

  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& c : cands) best = std::min(best, c.value);
  const auto tied = [&](int kind) -> const Candidate* {
    const Candidate* pick = nullptr;
    for (const Candidate& c : cands) {
      if (c.kind != kind || c.value > best + kTieTol) continue;
      if (pick == nullptr || std::abs(c.d) < std::abs(pick->d)) pick = &c;
    }
    return pick;
  };
  // Ties go to an endpoint only when the endpoint is first-order optimal;
  // otherwise the stationary root wins even when its value gain is below the
  // tie band. Extreme couplings make such microscopic moves the only way the
  // outer solver can drive the corresponding gradient entry to zero.
  if (const Candidate* c = tied(0); c != nullptr && subproblem_derivative(inst, c->d) >= 0.0)
    return {c->d, c->value};
  if (const Candidate* c = tied(1); c != nullptr && subproblem_derivative(inst, c->d) <= 0.0)
    return {c->d, c->value};
  for (int kind : {2, 3, 0, 1}) {
    if (const Candidate* c = tied(kind); c != nullptr) return {c->d, c->value};
  }
  throw RootFindingFailure("subproblem tie resolution found no candidate");
}

SubproblemSolution solve_subproblem_golden(const SubproblemInstance& inst) {
  constexpr double kInvGold = 0.6180339887498949;
  double lo = inst.lower;
  double hi = inst.upper;
  double x1 = hi - kInvGold * (hi - lo);
  double x2 = lo + kInvGold * (hi - lo);
  double f1 = subproblem_value(inst, x1);
  double f2 = subproblem_value(inst, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi));
       ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvGold * (hi - lo);
      f1 = subproblem_value(inst, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvGold * (hi - lo);
      f2 = subproblem_value(inst, x2);
    }
  }
  // golden section assumes unimodality; guard with the fixed candidates
  SubproblemSolution sol{0.5 * (lo + hi), subproblem_value(inst, 0.5 * (lo + hi))};
  for (double d : {inst.lower, inst.upper, 0.0, x1, x2}) {
    const double v = subproblem_value(inst, d);
    if (v < sol.value) sol = {d, v};
  }
  return sol;
}

}  // namespace covact
