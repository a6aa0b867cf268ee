#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "offload/model.hpp"
#include "offload/queue_sim.hpp"

using namespace offload;
using Catch::Matchers::WithinAbs;

namespace {

using Atoms = std::vector<SupportDistribution::Atom>;

StationaryScenario three_type_stationary() {
  SupportDistribution d({
      {0.2, {1.0, 1.0, 5.0, 10.0}},
      {0.4, {3.0, 2.0, 5.0, 10.0}},
      {0.4, {5.0, 3.0, 5.0, 10.0}},
  });
  return StationaryScenario(std::move(d), 0.5, 0.225);
}

Policy equilibrium3() { return Policy({1.0, 73.0 / 144.0, 0.0}); }

double second_half_mean(const std::vector<double>& samples) {
  const std::size_t start = samples.size() / 2;
  double sum = 0;
  for (std::size_t i = start; i < samples.size(); ++i) sum += samples[i];
  return sum / static_cast<double>(samples.size() - start);
}

}  // namespace

TEST_CASE("uniform grid ends exactly at the horizon") {
  auto g = uniform_grid(40.0, 200);
  REQUIRE(g.size() == 200);
  CHECK(g.back() == 40.0);
  CHECK_THAT(g.front(), WithinAbs(0.2, 1e-15));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_THROWS_AS(uniform_grid(0.0, 10), ValidationError);
  CHECK_THROWS_AS(uniform_grid(-1.0, 10), ValidationError);
  CHECK_THROWS_AS(uniform_grid(1.0, 0), ValidationError);
}

TEST_CASE("stationary prediction closed forms") {
  auto s = three_type_stationary();
  CHECK(stationary_prediction(s, zeros_policy(3)) == 0.0);
  // at the interior equilibrium: lambda A = 0.0181875 over headroom 0.36375
  CHECK_THAT(stationary_prediction(s, equilibrium3()), WithinAbs(0.025, 1e-12));

  SupportDistribution d2({
      {0.8, {3.0, 1.5, 5.0, 12.0}},
      {0.2, {1.5, 1.0, 2.0, 20.0}},
  });
  StationaryScenario s2(std::move(d2), 3.0, 0.6);
  CHECK_THAT(stationary_prediction(s2, Policy({0.24, 1.0})), WithinAbs(0.0418883, 1e-6));

  SupportDistribution heavy(Atoms{{1.0, {1.0, 10.0, 1.0, 10.0}}});
  StationaryScenario overload(std::move(heavy), 0.5, 1.0);
  CHECK_THROWS_AS(stationary_prediction(overload, Policy({1.0})), FeasibilityError);
}

TEST_CASE("all-local traffic never touches the pool") {
  auto s = three_type_stationary();
  std::vector<QueueEvent> events;
  std::vector<Job> jobs;
  auto grid = uniform_grid(50.0, 64);
  auto samples =
      simulate_trajectory(s, zeros_policy(3), 10, 50.0, grid, 99, &events, &jobs);
  REQUIRE(samples.size() == grid.size());
  for (double v : samples) CHECK(v == 0.0);
  CHECK(!events.empty());
  for (const auto& e : events) {
    CHECK((e.kind == EventKind::Arrival || e.kind == EventKind::LocalDone));
    CHECK(e.pool_after == 0);
    CHECK_FALSE(e.offloaded);
  }
  // local jobs are pure delays: sojourn is exactly L/f
  for (const auto& j : jobs) {
    if (j.phase != JobPhase::Done) continue;
    const Configuration& c = s.dist.atoms[static_cast<std::size_t>(j.type_index)].config;
    CHECK_THAT(j.completion_time - j.arrival_time, WithinAbs(local_time(c), 1e-12));
  }
}

TEST_CASE("nearly idle system obeys Little's law") {
  // single user, lambda so small that jobs almost never overlap: mean
  // occupancy is lambda * (W/R + L/f_per). Integrate occupancy from the
  // event log; grid sampling would be far too sparse for so rare a state.
  SupportDistribution d(Atoms{{1.0, {1.0, 1.0, 1.0, 20.0}}});
  StationaryScenario s(std::move(d), 0.5, 1e-3);
  const double horizon = 2e6;
  auto grid = uniform_grid(horizon, 2);
  std::vector<QueueEvent> events;
  simulate_trajectory(s, Policy({1.0}), 1, horizon, grid, 2024, &events);
  double integral = 0, prev = 0;
  int ntot = 0;
  for (const auto& e : events) {
    integral += ntot * (e.time - prev);
    prev = e.time;
    if (e.kind == EventKind::Arrival && e.offloaded) ++ntot;
    if (e.kind == EventKind::ServiceDone) --ntot;
  }
  integral += ntot * (horizon - prev);
  const double expect = 1e-3 * (0.05 + 1.0 / 0.5);
  CHECK_THAT(integral / horizon, WithinAbs(expect, 0.05 * expect));
}

TEST_CASE("occupancy at N=100 approaches the mean-field prediction") {
  auto s = three_type_stationary();
  const double horizon = 40.0 / s.lambda;
  auto grid = uniform_grid(horizon, 100);
  auto ens = run_ensemble(s, equilibrium3(), 100, horizon, grid, 150, 7, 2);
  CHECK(ens.n_users == 100);
  CHECK(ens.trajectories == 150);
  REQUIRE(ens.mean_ntot_over_n.size() == grid.size());
  CHECK_THAT(second_half_mean(ens.mean_ntot_over_n), WithinAbs(0.025, 0.005));
  for (double w : ens.ci68_halfwidth) CHECK(w >= 0.0);
}

TEST_CASE("simulation is deterministic in the seed") {
  auto s = three_type_stationary();
  auto grid = uniform_grid(30.0, 50);
  std::vector<QueueEvent> ev1, ev2, ev3;
  auto s1 = simulate_trajectory(s, equilibrium3(), 5, 30.0, grid, 555, &ev1);
  auto s2 = simulate_trajectory(s, equilibrium3(), 5, 30.0, grid, 555, &ev2);
  auto s3 = simulate_trajectory(s, equilibrium3(), 5, 30.0, grid, 556, &ev3);
  CHECK(s1 == s2);
  REQUIRE(ev1.size() == ev2.size());
  for (std::size_t i = 0; i < ev1.size(); ++i) {
    CHECK(ev1[i].time == ev2[i].time);
    CHECK(ev1[i].job == ev2[i].job);
    CHECK(ev1[i].kind == ev2[i].kind);
    CHECK(ev1[i].pool_after == ev2[i].pool_after);
    CHECK(ev1[i].in_system_after == ev2[i].in_system_after);
  }
  CHECK(s1 != s3);

  // ensemble statistics do not depend on the thread count
  auto e1 = run_ensemble(s, equilibrium3(), 10, 30.0, grid, 20, 42, 1);
  auto e4 = run_ensemble(s, equilibrium3(), 10, 30.0, grid, 20, 42, 4);
  CHECK(e1.mean_ntot_over_n == e4.mean_ntot_over_n);
  CHECK(e1.ci68_halfwidth == e4.ci68_halfwidth);
}

TEST_CASE("event log replays into the sampled occupancy") {
  auto s = three_type_stationary();
  auto grid = uniform_grid(60.0, 77);
  std::vector<QueueEvent> events;
  auto samples = simulate_trajectory(s, equilibrium3(), 5, 60.0, grid, 31, &events);

  std::vector<double> rebuilt;
  std::size_t gi = 0;
  int ntot = 0;
  const double inv_n = 1.0 / 5.0;  // mirror the simulator's arithmetic exactly
  for (const auto& e : events) {
    while (gi < grid.size() && grid[gi] < e.time) {
      rebuilt.push_back(static_cast<double>(ntot) * inv_n);
      ++gi;
    }
    if (e.kind == EventKind::Arrival && e.offloaded) ++ntot;
    if (e.kind == EventKind::ServiceDone) --ntot;
  }
  while (gi < grid.size()) {
    rebuilt.push_back(static_cast<double>(ntot) * inv_n);
    ++gi;
  }
  CHECK(samples == rebuilt);

  // the stream is time-sorted with completions ahead of arrivals on ties
  for (std::size_t i = 1; i < events.size(); ++i) {
    CHECK(events[i].time >= events[i - 1].time);
  }
}

TEST_CASE("pool service conserves work under the shared-clock discipline") {
  auto s = three_type_stationary();
  const int n = 5;
  const double f_pool = n * s.f_per;
  auto grid = uniform_grid(80.0, 10);
  std::vector<QueueEvent> events;
  simulate_trajectory(s, equilibrium3(), n, 80.0, grid, 77, &events);

  // replay: each InPool job accrues f_pool/N_tot cycles per second, where
  // N_tot also counts jobs still transmitting (their share idles)
  std::map<long long, double> received;
  int ntot = 0;
  double prev_t = 0;
  int checked = 0;
  for (const auto& e : events) {
    const double dt = e.time - prev_t;
    if (!received.empty() && ntot > 0) {
      const double share = dt * f_pool / static_cast<double>(ntot);
      for (auto& [id, got] : received) got += share;
    }
    prev_t = e.time;
    switch (e.kind) {
      case EventKind::Arrival:
        if (e.offloaded) ++ntot;
        break;
      case EventKind::UploadDone:
        received.emplace(e.job, 0.0);
        break;
      case EventKind::ServiceDone: {
        const double l = s.dist.atoms[static_cast<std::size_t>(e.type_index)].config.L;
        CHECK_THAT(received.at(e.job), WithinAbs(l, 1e-9 * l));
        received.erase(e.job);
        --ntot;
        ++checked;
        break;
      }
      case EventKind::LocalDone:
        break;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("sojourn bounds hold for every completed job") {
  auto s = three_type_stationary();
  const int n = 10;
  std::vector<Job> jobs;
  auto grid = uniform_grid(100.0, 10);
  simulate_trajectory(s, Policy({1.0, 0.5, 0.25}), n, 100.0, grid, 13, nullptr, &jobs);
  int done_off = 0, done_loc = 0;
  for (const auto& j : jobs) {
    if (j.phase != JobPhase::Done) continue;
    const Configuration& c = s.dist.atoms[static_cast<std::size_t>(j.type_index)].config;
    const double sojourn = j.completion_time - j.arrival_time;
    if (j.offloaded) {
      // upload plus best-case service with the whole pool to yourself
      CHECK(sojourn >= transmission_time(c) + c.L / (n * s.f_per) - 1e-12);
      ++done_off;
    } else {
      CHECK_THAT(sojourn, WithinAbs(local_time(c), 1e-12));
      ++done_loc;
    }
  }
  CHECK(done_off > 20);
  CHECK(done_loc > 20);
}

TEST_CASE("confidence halfwidth shrinks like root trajectories") {
  auto s = three_type_stationary();
  auto grid = uniform_grid(50.0, 100);
  auto small = run_ensemble(s, equilibrium3(), 5, 50.0, grid, 100, 64, 2);
  auto big = run_ensemble(s, equilibrium3(), 5, 50.0, grid, 200, 64, 2);
  double sum_small = 0, sum_big = 0;
  for (std::size_t i = grid.size() / 2; i < grid.size(); ++i) {
    sum_small += small.ci68_halfwidth[i];
    sum_big += big.ci68_halfwidth[i];
  }
  const double ratio = sum_big / sum_small;
  const double target = 1.0 / std::sqrt(2.0);
  CHECK(ratio > target * 0.8);
  CHECK(ratio < target * 1.2);
}

TEST_CASE("simulator argument validation") {
  auto s = three_type_stationary();
  auto grid = uniform_grid(10.0, 4);
  CHECK_THROWS_AS(simulate_trajectory(s, equilibrium3(), 0, 10.0, grid, 1), ValidationError);
  CHECK_THROWS_AS(simulate_trajectory(s, equilibrium3(), 5, 0.0, grid, 1), ValidationError);
  CHECK_THROWS_AS(simulate_trajectory(s, Policy({1.0}), 5, 10.0, grid, 1), AlignmentError);
  // grid beyond the horizon or non-increasing
  std::vector<double> bad1{1.0, 11.0};
  CHECK_THROWS_AS(simulate_trajectory(s, equilibrium3(), 5, 10.0, bad1, 1), ValidationError);
  std::vector<double> bad2{2.0, 2.0};
  CHECK_THROWS_AS(simulate_trajectory(s, equilibrium3(), 5, 10.0, bad2, 1), ValidationError);
  CHECK_THROWS_AS(run_ensemble(s, equilibrium3(), 5, 10.0, grid, 1, 1), ValidationError);
}

TEST_CASE("phase audit trail per job") {
  auto s = three_type_stationary();
  auto grid = uniform_grid(40.0, 4);
  std::vector<QueueEvent> events;
  simulate_trajectory(s, Policy({0.8, 0.5, 0.2}), 8, 40.0, grid, 5, &events);
  // per job: arrive, then upload_done -> service_done (offloaded) or
  // local_done, each at most once and in order
  std::map<long long, std::vector<EventKind>> trail;
  for (const auto& e : events) trail[e.job].push_back(e.kind);
  for (const auto& [id, kinds] : trail) {
    REQUIRE(!kinds.empty());
    CHECK(kinds[0] == EventKind::Arrival);
    if (kinds.size() > 1) {
      if (kinds[1] == EventKind::LocalDone) {
        CHECK(kinds.size() == 2);
      } else {
        CHECK(kinds[1] == EventKind::UploadDone);
        if (kinds.size() > 2) {
          CHECK(kinds.size() == 3);
          CHECK(kinds[2] == EventKind::ServiceDone);
        }
      }
    }
  }
}
