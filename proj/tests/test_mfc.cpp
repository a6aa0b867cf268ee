#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "offload/mfc.hpp"
#include "offload/model.hpp"

using namespace offload;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Heavy majority type, light minority type; the planner optimum sits on the
// boundary pi2 = 0 with pi1 = 0.5125 and value 1.11316666..., both obtained by
// minimizing the explicit quadratic by hand.
OneShotScenario two_type_oneshot() {
  SupportDistribution d({
      {0.8, {3.0, 5.0, 3.0, 10.0}},
      {0.2, {1.5, 1.5, 5.0, 25.0}},
  });
  return OneShotScenario(std::move(d), 3.0);
}

OneShotScenario three_type_oneshot() {
  SupportDistribution d({
      {0.2, {1.0, 1.0, 1.0, 20.0}},
      {0.4, {3.0, 2.0, 1.0, 20.0}},
      {0.4, {5.0, 3.0, 1.0, 20.0}},
  });
  return OneShotScenario(std::move(d), 0.5);
}

StationaryScenario two_type_stationary() {
  SupportDistribution d({
      {0.8, {3.0, 1.5, 5.0, 12.0}},
      {0.2, {1.5, 1.0, 2.0, 20.0}},
  });
  return StationaryScenario(std::move(d), 3.0, 0.6);
}

}  // namespace

TEST_CASE("quadratic assembly against hand-computed entries") {
  auto qp = assemble_qp(two_type_oneshot());
  REQUIRE(qp.k == 2);
  CHECK_THAT(qp.q(0, 0), WithinAbs(16.0 / 15.0, 1e-15));
  CHECK_THAT(qp.q(0, 1), WithinAbs(0.8 * 0.2 * 5.0 / 3.0, 1e-15));
  CHECK_THAT(qp.q(1, 0), WithinAbs(0.08, 1e-15));
  CHECK_THAT(qp.q(1, 1), WithinAbs(0.02, 1e-15));
  CHECK_THAT(qp.c[0], WithinAbs(-1.0933333333333333, 1e-15));
  CHECK_THAT(qp.c[1], WithinAbs(-0.048, 1e-15));
  CHECK_THAT(qp.constant, WithinAbs(1.3933333333333333, 1e-15));
  // the cross terms are intentionally asymmetric
  CHECK(qp.q(0, 1) != qp.q(1, 0));
}

TEST_CASE("quadratic form reproduces the direct objective") {
  auto s = three_type_oneshot();
  auto qp = assemble_qp(s);
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Policy pi({u(eng), u(eng), u(eng)});
    CHECK_THAT(qp_objective(qp, pi), WithinAbs(oneshot_objective(s, pi), 1e-12));
  }
  // corners too
  for (int mask = 0; mask < 8; ++mask) {
    Policy pi({double(mask & 1), double((mask >> 1) & 1), double((mask >> 2) & 1)});
    CHECK_THAT(qp_objective(qp, pi), WithinAbs(oneshot_objective(s, pi), 1e-12));
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  auto qp = assemble_qp(three_type_oneshot());
  Objective obj = [&](std::span<const double> x) { return qp_objective(qp, x); };
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x{u(eng), u(eng), u(eng)};
    auto g = qp_gradient(qp, std::span<const double>(x));
    auto fd = finite_difference_gradient(obj, std::span<const double>(x),
                                         obj(std::span<const double>(x)));
    for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(g[i], WithinAbs(fd[i], 1e-6));
  }
}

TEST_CASE("grid axis hits both endpoints exactly") {
  auto a1 = grid_axis(1.0);
  REQUIRE(a1.size() == 2);
  CHECK(a1.front() == 0.0);
  CHECK(a1.back() == 1.0);

  auto a2 = grid_axis(0.5);
  REQUIRE(a2.size() == 3);
  CHECK(a2[1] == 0.5);

  auto a3 = grid_axis(0.01);
  REQUIRE(a3.size() == 101);
  CHECK(a3.front() == 0.0);
  CHECK(a3.back() == 1.0);

  // a spacing that does not divide 1 still ends exactly at 1
  auto a4 = grid_axis(0.3);
  REQUIRE(a4.size() == 5);
  CHECK(a4.back() == 1.0);
  CHECK_THAT(a4[3], WithinAbs(0.9, 1e-12));

  CHECK_THROWS_AS(grid_axis(0.0), ValidationError);
  CHECK_THROWS_AS(grid_axis(-0.1), ValidationError);
  CHECK_THROWS_AS(grid_axis(1.5), ValidationError);
}

TEST_CASE("grid search finds the minimum of a separable bowl") {
  Objective bowl = [](std::span<const double> x) {
    double v = 0;
    const double target[] = {0.3, 0.7};
    for (std::size_t i = 0; i < x.size(); ++i) v += (x[i] - target[i]) * (x[i] - target[i]);
    return v;
  };
  auto r = grid_search(bowl, 2, 0.1);
  CHECK(r.evaluations == 121);
  CHECK_THAT(r.argmin[0], WithinAbs(0.3, 1e-12));
  CHECK_THAT(r.argmin[1], WithinAbs(0.7, 1e-12));
  CHECK(r.value < 1e-20);
  CHECK_FALSE(r.refined);
}

TEST_CASE("grid search tie-break keeps the first point in scan order") {
  Objective flat = [](std::span<const double>) { return 1.0; };
  auto r = grid_search(flat, 3, 0.5);
  CHECK(r.value == 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.argmin[i] == 0.0);
}

TEST_CASE("grid search skips non-finite regions") {
  Objective partial = [](std::span<const double> x) {
    return x[0] < 0.5 ? kInf : x[0];
  };
  auto r = grid_search(partial, 1, 0.25);
  CHECK(r.argmin[0] == 0.5);
  CHECK(r.value == 0.5);

  Objective never = [](std::span<const double>) { return kInf; };
  CHECK_THROWS_AS(grid_search(never, 2, 0.5), FeasibilityError);
}

TEST_CASE("grid search refuses oversized grids") {
  Objective flat = [](std::span<const double>) { return 1.0; };
  CHECK_THROWS_AS(grid_search(flat, 8, 0.01), BudgetError);
  CHECK_THROWS_AS(grid_search(flat, 1, 1e-9), BudgetError);
  OptimizeOptions small;
  small.max_points = 100;
  CHECK_THROWS_AS(grid_search(flat, 2, 0.01, small), BudgetError);
  CHECK_THROWS_AS(grid_search(flat, 0, 0.5), ValidationError);
}

TEST_CASE("local refinement converges on a smooth bowl") {
  Objective bowl = [](std::span<const double> x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.7) * (x[1] - 0.7);
  };
  auto r = refine_local(bowl, Gradient{}, Policy({0.0, 0.0}), 1e-10, 10000);
  CHECK(r.refined);
  CHECK_THAT(r.argmin[0], WithinAbs(0.3, 1e-6));
  CHECK_THAT(r.argmin[1], WithinAbs(0.7, 1e-6));

  // with the analytic gradient it lands harder
  Gradient grad = [](std::span<const double> x) {
    return std::vector<double>{2 * (x[0] - 0.3), 2 * (x[1] - 0.7)};
  };
  auto r2 = refine_local(bowl, grad, Policy({1.0, 0.0}), 1e-12, 10000);
  CHECK_THAT(r2.argmin[0], WithinAbs(0.3, 1e-9));
  CHECK_THAT(r2.argmin[1], WithinAbs(0.7, 1e-9));
}

TEST_CASE("refinement never worsens its start and respects the box") {
  // minimum outside the box: drive toward the corner (1, 0)
  Objective slope = [](std::span<const double> x) { return -3.0 * x[0] + 2.0 * x[1]; };
  auto r = refine_local(slope, Gradient{}, Policy({0.5, 0.5}), 1e-10, 10000);
  CHECK_THAT(r.argmin[0], WithinAbs(1.0, 1e-9));
  CHECK_THAT(r.argmin[1], WithinAbs(0.0, 1e-9));
  CHECK(r.value <= slope(std::span<const double>(std::vector<double>{0.5, 0.5})) + 1e-15);

  // starting inside an infeasible region returns the start untouched
  Objective never = [](std::span<const double>) { return kInf; };
  auto r2 = refine_local(never, Gradient{}, Policy({0.25}), 1e-10, 100);
  CHECK(r2.argmin[0] == 0.25);
  CHECK(std::isinf(r2.value));
}

TEST_CASE("finite differences fall back to one-sided stencils at a cliff") {
  Objective cliff = [](std::span<const double> x) {
    return x[0] > 0.5 ? kInf : x[0] * x[0];
  };
  std::vector<double> x{0.5};
  auto g = finite_difference_gradient(cliff, std::span<const double>(x),
                                      cliff(std::span<const double>(x)));
  CHECK_THAT(g[0], WithinAbs(1.0, 1e-3));
}

TEST_CASE("planner solution of the two-type one-shot game") {
  auto r = solve_mfc(Scenario(two_type_oneshot()));
  CHECK(r.refined);
  // closed form: pi = (0.5125, 0), J = 1.11316666...
  CHECK_THAT(r.value, WithinAbs(1.1131666666666667, 1e-9));
  CHECK_THAT(r.argmin[0], WithinAbs(0.5125, 1e-6));
  CHECK_THAT(r.argmin[1], WithinAbs(0.0, 1e-8));

  // reported value must agree with both the quadratic and the model formula
  auto s = two_type_oneshot();
  auto qp = assemble_qp(s);
  CHECK_THAT(r.value, WithinAbs(oneshot_objective(s, r.argmin), 1e-12));
  CHECK_THAT(qp_objective(qp, r.argmin), WithinAbs(oneshot_objective(s, r.argmin), 1e-12));
}

TEST_CASE("planner solution beats an independent coarse sweep") {
  auto s = three_type_oneshot();
  auto r = solve_mfc(Scenario(s));
  // independent exhaustive sweep at spacing 0.05, written out longhand
  double best = kInf;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      for (int l = 0; l <= 20; ++l) {
        Policy pi({i / 20.0, j / 20.0, l / 20.0});
        best = std::min(best, oneshot_objective(s, pi));
      }
    }
  }
  CHECK(r.value <= best + 1e-12);
}

TEST_CASE("planner solution of the two-type stationary game") {
  auto s = two_type_stationary();
  auto r = solve_mfc(Scenario(s));
  CHECK_THAT(r.value, WithinAbs(0.2522138, 1e-5));
  CHECK_THAT(r.argmin[0], WithinAbs(0.24, 0.01));
  CHECK(r.argmin[1] >= 1.0 - 1e-8);
  CHECK(stationary_feasible(s, r.argmin));
  // value is the model objective, not an optimizer artifact
  CHECK_THAT(r.value, WithinAbs(stationary_objective(s, r.argmin), 1e-12));
}

TEST_CASE("planner handles scenarios with a large infeasible region") {
  // offloading more than ~5/6 of the single type overloads the pool
  SupportDistribution d(std::vector<SupportDistribution::Atom>{{1.0, {1.0, 0.6, 0.5, 10.0}}});
  StationaryScenario s(std::move(d), 0.5, 1.0);
  auto r = solve_mfc(Scenario(s));
  CHECK(std::isfinite(r.value));
  CHECK(stationary_feasible(s, r.argmin));
  // local compute is painfully slow here (L/f = 1.2), so the planner offloads
  // as much as the pool survives
  CHECK(r.argmin[0] > 0.5);
}

TEST_CASE("span objectives agree with policy objectives") {
  auto os = three_type_oneshot();
  auto st = two_type_stationary();
  std::mt19937_64 eng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Policy p3({u(eng), u(eng), u(eng)});
    CHECK_THAT(oneshot_objective(os, std::span<const double>(p3.probs)),
               WithinAbs(oneshot_objective(os, p3), 1e-15));
    Policy p2({u(eng), u(eng)});
    double via_span = stationary_objective_or_inf(st, std::span<const double>(p2.probs));
    if (stationary_feasible(st, p2)) {
      CHECK_THAT(via_span, WithinAbs(stationary_objective(st, p2), 1e-15));
    } else {
      CHECK(std::isinf(via_span));
    }
  }
}
