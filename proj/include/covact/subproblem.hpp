// Exact minimization of the one-dimensional coordinate subproblem
//   phi(d) = sum_j [ log(1 + d*gamma[j]) - d*beta[j] / (1 + d*gamma[j]) ]
// over d in [lower, upper], via the real roots of the derivative numerator,
// a polynomial of degree 2B-1.
#pragma once

#include <vector>

namespace covact {

struct SubproblemInstance {
  std::vector<double> gamma;  // g[j] * c1[j], > 0 for PD covariances
  std::vector<double> beta;   // g[j] * c2[j], >= 0
  double lower = 0.0;         // -a, <= 0
  double upper = 1.0;         // 1 - a, >= 0
};

struct SubproblemSolution {
  double d = 0.0;
  double value = 0.0;  // phi(d)
};

// phi(d); throws DomainViolation if any 1 + d*gamma[j] <= 0
double subproblem_value(const SubproblemInstance& inst, double d);

// d/dd phi(d) for callers that polish or probe the derivative directly
double subproblem_derivative(const SubproblemInstance& inst, double d);

// ascending coefficients of P(d) = sum_j (gamma[j]*(1+d*gamma[j]) - beta[j]) *
// prod_{i!=j} (1+d*gamma[i])^2; P = phi' * prod_j (1+d*gamma[j])^2, so P and
// phi' share sign wherever the log domain holds
std::vector<double> derivative_poly(const SubproblemInstance& inst);

// global minimizer of phi over [lower, upper]: companion-matrix enumeration of
// the real roots of P inside the interval, then argmin of phi over the roots,
// both endpoints and 0. Value ties (1e-12 absolute) break toward the lower
// endpoint, then the upper endpoint, then the smallest |d|.
SubproblemSolution solve_subproblem(const SubproblemInstance& inst);

// safeguarded golden-section fallback on the same interval; cross-check only,
// never wired into the solvers by default
SubproblemSolution solve_subproblem_golden(const SubproblemInstance& inst);

}  // namespace covact
