#ifndef OFFLOAD_QUEUE_SIM_HPP
#define OFFLOAD_QUEUE_SIM_HPP

// Discrete-event simulation of the finite-N stationary system. Per user,
// tasks arrive Poisson(lambda); each draws a type and an offload decision.
// Local jobs are pure delays of L/f. Offloaded jobs upload for W/R
// (Transmitting), then sit in the shared pool (InPool) until they have
// received L cycles of service.
//
// Pool discipline: the pool capacity f_pool = N*f_per is split into one equal
// share per job currently offloaded (Transmitting or InPool, i.e. N_tot jobs),
// and only InPool jobs actually collect their share. A transmitting job's
// share idles. This is the discipline whose N -> infinity occupancy fixed
// point is nu = lambda*A + (lambda*B/f_per)*nu, i.e. exactly
// stationary_prediction = lambda*A*f_per/(f_per - lambda*B); giving the whole
// pool to InPool jobs instead makes the pool backlog O(1) so N_tot/N would
// converge to lambda*A alone, not to the prediction the ensemble is compared
// against.
//
// Service bookkeeping uses a virtual clock V that grows at the per-job rate
// f_pool/N_tot while the pool is nonempty; a job entering at V_e with L cycles
// finishes when V reaches V_e + L. Simultaneous events order completions
// before arrivals, then by job id, so runs are bit-reproducible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "offload/errors.hpp"
#include "offload/model.hpp"
#include "offload/parallel.hpp"
#include "offload/rng.hpp"

namespace offload {

enum class JobPhase { Transmitting, InPool, Local, Done };

struct Job {
  long long id = 0;
  int type_index = 0;
  bool offloaded = false;
  double arrival_time = 0;
  JobPhase phase = JobPhase::Local;
  // scheduled or realized end of the current phase; for unfinished InPool jobs
  // it stays unset and remaining_work carries the leftover cycles instead
  double completion_time = std::numeric_limits<double>::quiet_NaN();
  double remaining_work = 0;
};

enum class EventKind { Arrival, UploadDone, ServiceDone, LocalDone };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Arrival: return "arrive";
    case EventKind::UploadDone: return "upload_done";
    case EventKind::ServiceDone: return "service_done";
    case EventKind::LocalDone: return "local_done";
  }
  return "?";
}

struct QueueEvent {
  double time = 0;
  long long job = 0;
  EventKind kind = EventKind::Arrival;
  int pool_after = 0;       // InPool jobs after the event
  int in_system_after = 0;  // all unfinished jobs after the event
  int type_index = 0;
  bool offloaded = false;
};

// Grid of `points` sample times ending exactly at the horizon (never 0).
inline std::vector<double> uniform_grid(double horizon, int points) {
  if (!(horizon > 0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be positive and finite");
  }
  if (points < 1) throw ValidationError("grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        horizon * (static_cast<double>(i + 1) / static_cast<double>(points));
  }
  return grid;
}

// E[N_tot]/N in the mean-field limit: lambda*A transmitting plus
// lambda*B/f_alloc in the pool, which collapses to lambda*A*f_per/headroom.
// Zero when nobody offloads; infeasible loads are an error.
inline double stationary_prediction(const StationaryScenario& s, const Policy& pi) {
  const auto [a, b] = offload_load(s, pi);
  const double headroom = s.f_per - s.lambda * b;
  if (!(headroom > 0)) {
    throw FeasibilityError("stationary load infeasible: f_per - lambda*E[pi L] = " +
                           std::to_string(headroom) + " <= 0");
  }
  return s.lambda * a * s.f_per / headroom;
}

namespace detail {

inline void validate_grid(std::span<const double> grid, double horizon) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0) || !(grid[i] <= horizon)) {
      throw ValidationError("grid point " + std::to_string(i) + " outside [0, horizon]");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError("grid must be strictly increasing");
    }
  }
}

}  // namespace detail

inline std::vector<double> simulate_trajectory(const StationaryScenario& s, const Policy& pi,
                                               int n_users, double horizon,
                                               std::span<const double> grid,
                                               std::uint64_t seed,
                                               std::vector<QueueEvent>* events = nullptr,
                                               std::vector<Job>* jobs = nullptr) {
  require_aligned(s.dist, pi, "simulate_trajectory");
  if (n_users < 1) throw ValidationError("simulation needs at least one user");
  if (!(horizon > 0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be positive and finite");
  }
  detail::validate_grid(grid, horizon);

  const double f_pool = static_cast<double>(n_users) * s.f_per;
  const double arrival_rate = s.lambda * static_cast<double>(n_users);
  Rng rng(seed);

  // min-heaps keyed (time-or-deadline, job id)
  using Entry = std::pair<double, long long>;
  using MinHeap = std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>>;
  MinHeap tx_heap;     // scheduled upload completions
  MinHeap local_heap;  // scheduled local completions
  MinHeap pool_heap;   // virtual-clock deadlines V_entry + L

  double t = 0;
  double v = 0;  // virtual pool clock: per-job cycles delivered so far
  int n_tx = 0, n_pool = 0, n_local = 0;
  long long next_id = 0;
  double next_arrival = rng.exponential(arrival_rate);

  std::vector<Job> all_jobs;
  std::vector<double> samples;
  samples.reserve(grid.size());
  std::size_t gi = 0;
  const double inv_n = 1.0 / static_cast<double>(n_users);

  const auto record_event = [&](double time, long long id, EventKind kind, int type_index,
                                bool offloaded) {
    if (events) {
      events->push_back(
          {time, id, kind, n_pool, n_tx + n_pool + n_local, type_index, offloaded});
    }
  };

  enum Next { kNone, kPool, kTx, kLocal, kArrival };
  for (;;) {
    // choose the next event: min time, completions before arrivals, then id
    double best_t = std::numeric_limits<double>::infinity();
    int best_prio = 2;
    long long best_id = std::numeric_limits<long long>::max();
    Next which = kNone;
    const auto consider = [&](double time, int prio, long long id, Next what) {
      if (time < best_t || (time == best_t && (prio < best_prio ||
                                               (prio == best_prio && id < best_id)))) {
        best_t = time;
        best_prio = prio;
        best_id = id;
        which = what;
      }
    };
    if (n_pool > 0) {
      const double gap = pool_heap.top().first > v ? pool_heap.top().first - v : 0.0;
      const double n_tot = static_cast<double>(n_tx + n_pool);
      consider(t + gap * n_tot / f_pool, 0, pool_heap.top().second, kPool);
    }
    if (!tx_heap.empty()) consider(tx_heap.top().first, 0, tx_heap.top().second, kTx);
    if (!local_heap.empty())
      consider(local_heap.top().first, 0, local_heap.top().second, kLocal);
    consider(next_arrival, 1, next_id, kArrival);

    if (which == kNone || best_t > horizon) break;

    // the state is constant on [t, best_t): emit samples strictly before it
    while (gi < grid.size() && grid[gi] < best_t) {
      samples.push_back(static_cast<double>(n_tx + n_pool) * inv_n);
      ++gi;
    }
    if (n_pool > 0) {
      v += (best_t - t) * f_pool / static_cast<double>(n_tx + n_pool);
    }
    t = best_t;

    switch (which) {
      case kArrival: {
        const long long id = next_id++;
        const int type = detail::draw_type(s.dist, rng.uniform());
        const bool off = rng.uniform() < pi[static_cast<std::size_t>(type)];
        next_arrival = t + rng.exponential(arrival_rate);
        const Configuration& c = s.dist.atoms[static_cast<std::size_t>(type)].config;
        Job job;
        job.id = id;
        job.type_index = type;
        job.offloaded = off;
        job.arrival_time = t;
        if (off) {
          job.phase = JobPhase::Transmitting;
          job.completion_time = t + transmission_time(c);
          tx_heap.emplace(job.completion_time, id);
          ++n_tx;
        } else {
          job.phase = JobPhase::Local;
          job.completion_time = t + local_time(c);
          local_heap.emplace(job.completion_time, id);
          ++n_local;
        }
        all_jobs.push_back(job);
        record_event(t, id, EventKind::Arrival, type, off);
        break;
      }
      case kTx: {
        const long long id = tx_heap.top().second;
        tx_heap.pop();
        --n_tx;
        ++n_pool;
        Job& job = all_jobs[static_cast<std::size_t>(id)];
        job.phase = JobPhase::InPool;
        const double l = s.dist.atoms[static_cast<std::size_t>(job.type_index)].config.L;
        job.remaining_work = l;
        job.completion_time = std::numeric_limits<double>::quiet_NaN();
        pool_heap.emplace(v + l, id);
        record_event(t, id, EventKind::UploadDone, job.type_index, true);
        break;
      }
      case kPool: {
        const long long id = pool_heap.top().second;
        // snap forward: the job has received exactly L cycles (never rewind v)
        if (pool_heap.top().first > v) v = pool_heap.top().first;
        pool_heap.pop();
        --n_pool;
        Job& job = all_jobs[static_cast<std::size_t>(id)];
        job.phase = JobPhase::Done;
        job.completion_time = t;
        job.remaining_work = 0;
        record_event(t, id, EventKind::ServiceDone, job.type_index, true);
        break;
      }
      case kLocal: {
        const long long id = local_heap.top().second;
        local_heap.pop();
        --n_local;
        Job& job = all_jobs[static_cast<std::size_t>(id)];
        job.phase = JobPhase::Done;
        job.completion_time = t;
        record_event(t, id, EventKind::LocalDone, job.type_index, false);
        break;
      }
      case kNone:
        break;
    }
  }

  // tail of the grid sees the final state
  while (gi < grid.size()) {
    samples.push_back(static_cast<double>(n_tx + n_pool) * inv_n);
    ++gi;
  }

  if (jobs) {
    // leftover cycles of jobs still in the pool at the horizon
    while (!pool_heap.empty()) {
      const auto [deadline, id] = pool_heap.top();
      pool_heap.pop();
      all_jobs[static_cast<std::size_t>(id)].remaining_work =
          deadline > v ? deadline - v : 0.0;
    }
    *jobs = std::move(all_jobs);
  }
  return samples;
}

struct TrajectoryEnsemble {
  std::vector<double> time_grid;
  std::vector<double> mean_ntot_over_n;
  std::vector<double> ci68_halfwidth;  // sample sd / sqrt(trajectories)
  long long trajectories = 0;
  int n_users = 0;
};

inline TrajectoryEnsemble run_ensemble(const StationaryScenario& s, const Policy& pi,
                                       int n_users, double horizon,
                                       std::span<const double> grid, long long trajectories,
                                       std::uint64_t seed, int threads = 1) {
  if (trajectories < 2) {
    throw ValidationError("ensemble needs at least 2 trajectories for a confidence interval");
  }
  require_aligned(s.dist, pi, "run_ensemble");
  detail::validate_grid(grid, horizon);

  const std::size_t g = grid.size();
  std::vector<double> table(static_cast<std::size_t>(trajectories) * g);
  parallel_for_chunks(trajectories, threads, [&](long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      const auto row = simulate_trajectory(
          s, pi, n_users, horizon, grid,
          derive_seed(seed, kStreamTrajectory, static_cast<std::uint64_t>(i)));
      std::copy(row.begin(), row.end(), table.begin() + static_cast<std::size_t>(i) * g);
    }
  });

  TrajectoryEnsemble out;
  out.time_grid.assign(grid.begin(), grid.end());
  out.mean_ntot_over_n.resize(g);
  out.ci68_halfwidth.resize(g);
  out.trajectories = trajectories;
  out.n_users = n_users;
  const double tcount = static_cast<double>(trajectories);
  for (std::size_t j = 0; j < g; ++j) {
    double sum = 0;
    for (long long i = 0; i < trajectories; ++i) {
      sum += table[static_cast<std::size_t>(i) * g + j];
    }
    const double mean = sum / tcount;
    double ss = 0;
    for (long long i = 0; i < trajectories; ++i) {
      const double d = table[static_cast<std::size_t>(i) * g + j] - mean;
      ss += d * d;
    }
    out.mean_ntot_over_n[j] = mean;
    out.ci68_halfwidth[j] = std::sqrt(ss / (tcount - 1.0) / tcount);
  }
  return out;
}

}  // namespace offload

#endif  // OFFLOAD_QUEUE_SIM_HPP
