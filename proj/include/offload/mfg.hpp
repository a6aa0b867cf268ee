#ifndef OFFLOAD_MFG_HPP
#define OFFLOAD_MFG_HPP

// Competitive side: find a policy nobody wants to deviate from. The key
// structural fact is that against a fixed population the best reply of every
// type is a pure threshold — offload exactly when the offload cost is strictly
// below the local cost — so fictitious play only ever averages 0/1 vectors:
//
//   avg_0 = 0 (weight zero, it only seeds the first best reply),
//   br_n  = BR(avg_{n-1}),   avg_n = ((n-1) avg_{n-1} + br_n) / n.
//
// Exploitability of avg_n (the gain of the best unilateral deviation) is the
// convergence certificate recorded each iteration; it decays like 1/n with
// small bounded upticks, so callers wanting a monotone read should track the
// running minimum.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "offload/errors.hpp"
#include "offload/model.hpp"

namespace offload {

struct FictitiousPlayOptions {
  int max_iters = 5000;
  double tol = 1e-6;  // stop once exploitability drops below this
};

struct ExploitabilityPoint {
  int iteration = 0;      // 1-based
  double exploitability = 0;
  double seconds = 0;     // wall clock since the run started
};

struct FictitiousPlayReport {
  Policy final_policy;
  std::vector<ExploitabilityPoint> history;  // one entry per iteration run
  std::vector<Policy> policy_history;        // the averaged policy after each iteration
  int iterations_run = 0;
  bool converged = false;
};

// Raised when the averaged policy wanders into an infeasible stationary load;
// carries whatever was computed so far so callers can still inspect the path.
struct FictitiousPlayInfeasible : FeasibilityError {
  FictitiousPlayReport partial;
  FictitiousPlayInfeasible(const std::string& msg, FictitiousPlayReport r)
      : FeasibilityError(msg), partial(std::move(r)) {}
};

namespace detail {

inline std::vector<TypeCosts> population_costs(const OneShotScenario& s, const Policy& pop) {
  return oneshot_type_costs(s, pop);
}
inline std::vector<TypeCosts> population_costs(const StationaryScenario& s,
                                               const Policy& pop) {
  return stationary_type_costs(s, pop);
}

inline Policy best_response_from(const std::vector<TypeCosts>& costs) {
  std::vector<double> br(costs.size());
  for (std::size_t j = 0; j < costs.size(); ++j) {
    // strict comparison: an indifferent type stays local
    br[j] = costs[j].offload < costs[j].local ? 1.0 : 0.0;
  }
  return Policy(std::move(br));
}

inline double exploitability_from(const SupportDistribution& dist, const Policy& pop,
                                  const std::vector<TypeCosts>& costs) {
  double gap = 0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double played = pop[j] * costs[j].offload + (1.0 - pop[j]) * costs[j].local;
    const double best = std::min(costs[j].offload, costs[j].local);
    gap += dist.atoms[j].p * (played - best);
  }
  return gap;
}

template <class Sc>
FictitiousPlayReport fictitious_play_impl(const Sc& s, const FictitiousPlayOptions& opts) {
  if (opts.max_iters < 1) throw ValidationError("fictitious play needs max_iters >= 1");
  if (!(opts.tol >= 0)) throw ValidationError("fictitious play needs tol >= 0");
  const std::size_t k = s.dist.size();

  FictitiousPlayReport report;
  report.final_policy = zeros_policy(k);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<double> avg(k, 0.0);
  Policy avg_pi = report.final_policy;
  // costs against the current average; the zero start only seeds iteration 1
  std::vector<TypeCosts> costs = population_costs(s, avg_pi);
  for (int n = 1; n <= opts.max_iters; ++n) {
    const Policy br = best_response_from(costs);
    for (std::size_t j = 0; j < k; ++j) {
      double v = (static_cast<double>(n - 1) * avg[j] + br[j]) / static_cast<double>(n);
      avg[j] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);  // guard rounding out of the box
    }
    avg_pi = Policy(avg);
    report.final_policy = avg_pi;
    try {
      costs = population_costs(s, avg_pi);
    } catch (const FeasibilityError& e) {
      report.iterations_run = n;
      throw FictitiousPlayInfeasible(
          "fictitious play entered an infeasible load at iteration " + std::to_string(n) +
              ": " + e.what(),
          std::move(report));
    }
    const double delta = exploitability_from(s.dist, avg_pi, costs);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.history.push_back({n, delta, elapsed});
    report.policy_history.push_back(avg_pi);
    report.iterations_run = n;
    if (delta < opts.tol) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace detail

inline Policy best_response(const OneShotScenario& s, const Policy& pop) {
  return detail::best_response_from(detail::population_costs(s, pop));
}
inline Policy best_response(const StationaryScenario& s, const Policy& pop) {
  return detail::best_response_from(detail::population_costs(s, pop));
}
inline Policy best_response(const Scenario& sc, const Policy& pop) {
  return std::visit([&](const auto& s) { return best_response(s, pop); }, sc);
}

inline double exploitability(const OneShotScenario& s, const Policy& pop) {
  return detail::exploitability_from(s.dist, pop, detail::population_costs(s, pop));
}
inline double exploitability(const StationaryScenario& s, const Policy& pop) {
  return detail::exploitability_from(s.dist, pop, detail::population_costs(s, pop));
}
inline double exploitability(const Scenario& sc, const Policy& pop) {
  return std::visit([&](const auto& s) { return exploitability(s, pop); }, sc);
}

inline FictitiousPlayReport fictitious_play(const OneShotScenario& s,
                                            const FictitiousPlayOptions& opts = {}) {
  return detail::fictitious_play_impl(s, opts);
}
inline FictitiousPlayReport fictitious_play(const StationaryScenario& s,
                                            const FictitiousPlayOptions& opts = {}) {
  return detail::fictitious_play_impl(s, opts);
}
inline FictitiousPlayReport fictitious_play(const Scenario& sc,
                                            const FictitiousPlayOptions& opts = {}) {
  return std::visit([&](const auto& s) { return fictitious_play(s, opts); }, sc);
}

}  // namespace offload

#endif  // OFFLOAD_MFG_HPP
