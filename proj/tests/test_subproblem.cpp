#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covact/errors.hpp"
#include "covact/rng.hpp"
#include "covact/subproblem.hpp"

using covact::SubproblemInstance;

namespace {

// literal transcription of the 1-D objective, kept separate from the library
double phi_oracle(const SubproblemInstance& inst, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.gamma.size(); ++j)
    acc += std::log(1.0 + d * inst.gamma[j]) -
           d * inst.beta[j] / (1.0 + d * inst.gamma[j]);
  return acc;
}

// literal derivative: sum_j [ gamma/(1+dg) - beta/(1+dg)^2 ]
double dphi_oracle(const SubproblemInstance& inst, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.gamma.size(); ++j) {
    const double t = 1.0 + d * inst.gamma[j];
    acc += inst.gamma[j] / t - inst.beta[j] / (t * t);
  }
  return acc;
}

double poly_eval(const std::vector<double>& coeffs, double d) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * d + coeffs[i];
  return acc;
}

// log-uniform magnitudes mimic the raw-gain couplings the solver feeds in;
// the starting activity is capped so the whole interval clears the log poles
// (a * gamma_max < 1), the invariant every model-derived instance satisfies
SubproblemInstance random_instance(covact::Rng& rng, int b) {
  SubproblemInstance inst;
  inst.gamma.resize(static_cast<std::size_t>(b));
  inst.beta.resize(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) {
    inst.gamma[static_cast<std::size_t>(j)] =
        std::pow(10.0, -2.0 + 5.0 * rng.uniform());
    inst.beta[static_cast<std::size_t>(j)] =
        inst.gamma[static_cast<std::size_t>(j)] * std::pow(10.0, -1.0 + 2.0 * rng.uniform());
  }
  const double gmax = *std::max_element(inst.gamma.begin(), inst.gamma.end());
  const double a = std::min(1.0, 0.99 / gmax) * rng.uniform();
  inst.lower = -a;
  inst.upper = 1.0 - a;
  return inst;
}

double grid_min(const SubproblemInstance& inst, int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= points; ++i) {
    const double d = inst.lower + (inst.upper - inst.lower) * i / points;
    best = std::min(best, phi_oracle(inst, d));
  }
  return best;
}

}  // namespace

TEST_CASE("phi is exactly zero at d = 0") {
  covact::Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = random_instance(rng, 3);
    CHECK(covact::subproblem_value(inst, 0.0) == 0.0);
  }
}

TEST_CASE("phi at a hand-computed point") {
  SubproblemInstance inst;
  inst.gamma = {1.0};
  inst.beta = {2.0};
  inst.lower = 0.0;
  inst.upper = 1.0;
  CHECK(covact::subproblem_value(inst, 1.0) ==
        doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-12));
  CHECK(covact::subproblem_value(inst, 1.0) == doctest::Approx(-0.306853).epsilon(1e-5));
}

TEST_CASE("phi matches the literal oracle on a grid") {
  covact::Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, 4);
    for (int i = 0; i <= 50; ++i) {
      const double d = inst.lower + (inst.upper - inst.lower) * i / 50;
      bool ok = true;
      for (double g : inst.gamma)
        if (1.0 + d * g <= 0.0) ok = false;
      if (!ok) continue;
      CHECK(covact::subproblem_value(inst, d) ==
            doctest::Approx(phi_oracle(inst, d)).epsilon(1e-12));
    }
  }
}

TEST_CASE("phi rejects log-domain violations") {
  SubproblemInstance inst;
  inst.gamma = {2.0};
  inst.beta = {1.0};
  inst.lower = -1.0;
  inst.upper = 0.0;
  CHECK_THROWS_AS((void)covact::subproblem_value(inst, -1.0), covact::DomainViolation);
}

TEST_CASE("derivative polynomial in the single-cell case is linear") {
  SubproblemInstance inst;
  inst.gamma = {3.0};
  inst.beta = {1.5};
  inst.lower = -0.5;
  inst.upper = 0.5;
  const auto p = covact::derivative_poly(inst);
  // P(d) = (gamma - beta) + gamma^2 d
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(3.0 - 1.5).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("derivative polynomial satisfies the product identity") {
  covact::Rng rng(3);
  for (int b : {2, 4, 7}) {
    const auto inst = random_instance(rng, b);
    const auto p = covact::derivative_poly(inst);
    REQUIRE(p.size() == 2 * static_cast<std::size_t>(b));
    for (int i = 0; i < 20; ++i) {
      const double d = inst.lower + (inst.upper - inst.lower) * (i + 0.5) / 20;
      bool ok = true;
      double prod = 1.0;
      for (double g : inst.gamma) {
        const double t = 1.0 + d * g;
        if (t <= 0.0) ok = false;
        prod *= t * t;
      }
      if (!ok) continue;
      const double expect = dphi_oracle(inst, d) * prod;
      const double got = poly_eval(p, d);
      CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("stationary instances return a zero step") {
  covact::Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = random_instance(rng, 3);
    inst.beta = inst.gamma;  // phi'(0) = 0 and d = 0 is the minimizer
    const auto p = covact::derivative_poly(inst);
    CHECK(std::abs(poly_eval(p, 0.0)) < 1e-12);
    const auto sol = covact::solve_subproblem(inst);
    CHECK(sol.d == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(sol.value <= 1e-12);
  }
}

TEST_CASE("single-cell closed form with clamping") {
  SubproblemInstance inst;
  inst.gamma = {1.0};
  inst.beta = {3.0};
  inst.lower = 0.0;
  inst.upper = 1.0;
  // unconstrained root (3-1)/1 = 2 clamps to the upper endpoint, bitwise
  const auto sol = covact::solve_subproblem(inst);
  CHECK(sol.d == 1.0);
  CHECK(sol.value == doctest::Approx(phi_oracle(inst, 1.0)).epsilon(1e-12));

  // a clamp to the lower endpoint is returned bitwise as well
  inst.gamma = {0.5};
  inst.beta = {0.0};
  inst.lower = -1.0;
  inst.upper = 0.0;
  // unconstrained root (0 - 0.5)/0.25 = -2 clamps to -1
  const auto lo = covact::solve_subproblem(inst);
  CHECK(lo.d == -1.0);
}

TEST_CASE("single-cell solutions match clamp((beta-gamma)/gamma^2)") {
  covact::Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = random_instance(rng, 1);
    const auto sol = covact::solve_subproblem(inst);
    const double closed =
        std::clamp((inst.beta[0] - inst.gamma[0]) / (inst.gamma[0] * inst.gamma[0]),
                   inst.lower, inst.upper);
    CHECK(sol.d == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("solver beats a dense grid on random multi-cell instances") {
  covact::Rng rng(6);
  for (int rep = 0; rep < 60; ++rep) {
    const int b = std::vector<int>{2, 4, 7}[static_cast<std::size_t>(rep % 3)];
    const auto inst = random_instance(rng, b);
    const auto sol = covact::solve_subproblem(inst);

    CHECK(sol.d >= inst.lower);
    CHECK(sol.d <= inst.upper);
    for (double g : inst.gamma) CHECK(1.0 + sol.d * g > 0.0);
    CHECK(sol.value <= 1e-15);  // phi(0) = 0 is always feasible
    CHECK(sol.value == doctest::Approx(phi_oracle(inst, sol.d)).epsilon(1e-10));
    CHECK(sol.value <= grid_min(inst, 100000) + 1e-8);
  }
}

TEST_CASE("golden-section fallback agrees with the root-based solver") {
  covact::Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, 3);
    const auto root = covact::solve_subproblem(inst);
    const auto gold = covact::solve_subproblem_golden(inst);
    // the enumerating solver can only be at least as good
    CHECK(root.value <= gold.value + 1e-9);
  }
}

TEST_CASE("mismatched coefficient lengths are rejected") {
  SubproblemInstance inst;
  inst.gamma = {1.0, 2.0};
  inst.beta = {1.0};
  inst.lower = 0.0;
  inst.upper = 1.0;
  CHECK_THROWS_AS((void)covact::solve_subproblem(inst), covact::DimensionMismatch);
  inst.beta = {1.0, 1.0};
  inst.lower = 0.5;  // interval no longer contains 0
  CHECK_THROWS_AS((void)covact::solve_subproblem(inst), covact::DomainViolation);
}
