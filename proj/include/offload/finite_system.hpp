#ifndef OFFLOAD_FINITE_SYSTEM_HPP
#define OFFLOAD_FINITE_SYSTEM_HPP

// Monte Carlo evaluation of a mean-field policy inside the actual N-user
// one-shot system, where the pool capacity is N*f_per split over however many
// users really offloaded. Two estimators:
//
//  - exploitability: agent 1 deviates; its best pure deviation policy (a map
//    type -> {0,1}) is chosen by sample-average cost, with the same population
//    draws reused across all candidate policies (common random numbers). The
//    reported number is avg cost when agent 1 follows the policy minus the
//    best deviation's avg cost, with the standard error of that difference.
//    Averages over pure policies decompose by the deviator's type, so the 2^K
//    candidate sweep reduces to a per-type minimum; the budget guard still
//    prices it as 2^K, matching the definition it implements.
//
//  - cooperative deviation: everyone follows the policy; compare the realized
//    per-capita cost against the infinite-N objective.
//
// Sample i always consumes its own RNG seeded by derive_seed(seed, stream, i),
// and every reduction walks samples in index order, so results are
// bit-identical for any thread count.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "offload/errors.hpp"
#include "offload/model.hpp"
#include "offload/parallel.hpp"
#include "offload/rng.hpp"

namespace offload {

inline constexpr int kMaxExploitTypes = 20;       // 2^K candidate policies priced below
inline constexpr double kSampleBudget = 1e9;      // max samples * 2^K

struct FiniteEvalResult {
  int n_users = 0;
  double estimate = 0;
  double standard_error = 0;
  long long samples = 0;
  std::uint64_t seed = 0;
};

// One realized draw of the N-user system.
struct SampledPopulation {
  std::vector<int> type_indices;   // values in [0, K)
  std::vector<int> decisions;      // values in {0, 1}
};

inline void validate(const SampledPopulation& pop, std::size_t k) {
  if (pop.type_indices.size() != pop.decisions.size()) {
    throw ValidationError("population has " + std::to_string(pop.type_indices.size()) +
                          " types but " + std::to_string(pop.decisions.size()) + " decisions");
  }
  for (std::size_t i = 0; i < pop.type_indices.size(); ++i) {
    if (pop.type_indices[i] < 0 || static_cast<std::size_t>(pop.type_indices[i]) >= k) {
      throw ValidationError("agent " + std::to_string(i) + ": type index " +
                            std::to_string(pop.type_indices[i]) + " out of range");
    }
    if (pop.decisions[i] != 0 && pop.decisions[i] != 1) {
      throw ValidationError("agent " + std::to_string(i) + ": decision must be 0 or 1");
    }
  }
}

// Each agent consumes exactly two uniforms (type, then decision), so streams
// stay aligned no matter what the probabilities are.
inline SampledPopulation draw_population(const SupportDistribution& dist, const Policy& pi,
                                         int n_users, Rng& rng) {
  require_aligned(dist, pi, "draw_population");
  if (n_users < 1) throw ValidationError("population needs at least one user");
  SampledPopulation pop;
  pop.type_indices.resize(static_cast<std::size_t>(n_users));
  pop.decisions.resize(static_cast<std::size_t>(n_users));
  for (int i = 0; i < n_users; ++i) {
    const int t = detail::draw_type(dist, rng.uniform());
    pop.type_indices[static_cast<std::size_t>(i)] = t;
    pop.decisions[static_cast<std::size_t>(i)] =
        rng.uniform() < pi[static_cast<std::size_t>(t)] ? 1 : 0;
  }
  return pop;
}

// Agent i's realized delay: offloaders split the pool N*f_per evenly among the
// S offloaders, so each pays L*S/(N*f_per) of processing on top of the upload.
inline double realized_cost(const SampledPopulation& pop, const OneShotScenario& s,
                            std::size_t agent) {
  const std::size_t n = pop.type_indices.size();
  if (agent >= n) {
    throw ValidationError("agent index " + std::to_string(agent) + " out of range");
  }
  const Configuration& c =
      s.dist.atoms[static_cast<std::size_t>(pop.type_indices[agent])].config;
  if (pop.decisions[agent] == 0) return local_time(c);
  long long total_offload = 0;
  for (std::size_t i = 0; i < n; ++i) total_offload += pop.decisions[i];
  return transmission_time(c) +
         c.L * static_cast<double>(total_offload) /
             (static_cast<double>(n) * s.f_per);
}

namespace detail {

struct PerTypeTables {
  std::vector<double> tx;    // W/R
  std::vector<double> loc;   // L/f
  std::vector<double> lpool; // L/(N f_per)
};

inline PerTypeTables make_tables(const OneShotScenario& s, int n_users) {
  PerTypeTables t;
  const std::size_t k = s.dist.size();
  t.tx.resize(k);
  t.loc.resize(k);
  t.lpool.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Configuration& c = s.dist.atoms[j].config;
    t.tx[j] = transmission_time(c);
    t.loc[j] = local_time(c);
    t.lpool[j] = c.L / (static_cast<double>(n_users) * s.f_per);
  }
  return t;
}

inline void check_common_args(const OneShotScenario& s, const Policy& pi, int n_users,
                              long long samples, const char* what) {
  require_aligned(s.dist, pi, what);
  if (n_users < 1) throw ValidationError(std::string(what) + ": N must be >= 1");
  if (samples < 1) throw ValidationError(std::string(what) + ": samples must be >= 1");
}

}  // namespace detail

inline FiniteEvalResult estimate_exploitability_n(const OneShotScenario& s, const Policy& pi,
                                                  int n_users, long long samples,
                                                  std::uint64_t seed, int threads = 1) {
  detail::check_common_args(s, pi, n_users, samples, "estimate_exploitability_n");
  const std::size_t k = s.dist.size();
  if (k > static_cast<std::size_t>(kMaxExploitTypes)) {
    throw BudgetError("exploitability enumerates 2^K pure policies; K = " +
                      std::to_string(k) + " exceeds the limit of " +
                      std::to_string(kMaxExploitTypes));
  }
  const double priced = static_cast<double>(samples) * std::pow(2.0, static_cast<double>(k));
  if (priced > kSampleBudget) {
    throw BudgetError("samples * 2^K = " + std::to_string(priced) +
                      " exceeds the evaluation budget");
  }

  // per-sample facts sufficient to score any deviation policy afterwards
  std::vector<std::uint8_t> dev_type(static_cast<std::size_t>(samples));
  std::vector<std::uint8_t> base_decision(static_cast<std::size_t>(samples));
  std::vector<std::uint32_t> others_offloading(static_cast<std::size_t>(samples));

  parallel_for_chunks(samples, threads, [&](long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, kStreamExploitSample, static_cast<std::uint64_t>(i)));
      const int t1 = detail::draw_type(s.dist, rng.uniform());
      const bool x1 = rng.uniform() < pi[static_cast<std::size_t>(t1)];
      std::uint32_t rest = 0;
      for (int a = 1; a < n_users; ++a) {
        const int t = detail::draw_type(s.dist, rng.uniform());
        rest += rng.uniform() < pi[static_cast<std::size_t>(t)] ? 1u : 0u;
      }
      dev_type[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(t1);
      base_decision[static_cast<std::size_t>(i)] = x1 ? 1 : 0;
      others_offloading[static_cast<std::size_t>(i)] = rest;
    }
  });

  const detail::PerTypeTables tab = detail::make_tables(s, n_users);

  // pass 1 (index order): baseline average and per-type deviation accumulators
  std::vector<double> sum_off(k, 0.0);
  std::vector<long long> count(k, 0);
  double sum_base = 0;
  for (long long i = 0; i < samples; ++i) {
    const std::size_t t1 = dev_type[static_cast<std::size_t>(i)];
    const double off = tab.tx[t1] + tab.lpool[t1] *
                       (static_cast<double>(others_offloading[static_cast<std::size_t>(i)]) + 1.0);
    sum_off[t1] += off;
    ++count[t1];
    sum_base += base_decision[static_cast<std::size_t>(i)] ? off : tab.loc[t1];
  }

  // the best pure deviation policy decomposes per type; ties keep "local",
  // matching a first-wins scan of the 2^K policies in ascending mask order
  std::vector<std::uint8_t> best_policy(k, 0);
  double sum_best = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double off = sum_off[j];
    const double loc = static_cast<double>(count[j]) * tab.loc[j];
    best_policy[j] = off < loc ? 1 : 0;
    sum_best += best_policy[j] ? off : loc;
  }

  const double mean_diff = (sum_base - sum_best) / static_cast<double>(samples);

  // pass 2 (index order): spread of the per-sample paired difference
  double ss = 0;
  for (long long i = 0; i < samples; ++i) {
    const std::size_t t1 = dev_type[static_cast<std::size_t>(i)];
    const double off = tab.tx[t1] + tab.lpool[t1] *
                       (static_cast<double>(others_offloading[static_cast<std::size_t>(i)]) + 1.0);
    const double base = base_decision[static_cast<std::size_t>(i)] ? off : tab.loc[t1];
    const double dev = best_policy[t1] ? off : tab.loc[t1];
    const double d = (base - dev) - mean_diff;
    ss += d * d;
  }

  FiniteEvalResult r;
  r.n_users = n_users;
  r.estimate = mean_diff;
  r.standard_error =
      samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1) /
                              static_cast<double>(samples))
                  : 0.0;
  r.samples = samples;
  r.seed = seed;
  return r;
}

inline FiniteEvalResult estimate_coop_deviation(const OneShotScenario& s, const Policy& pi,
                                                int n_users, long long samples,
                                                std::uint64_t seed, int threads = 1) {
  detail::check_common_args(s, pi, n_users, samples, "estimate_coop_deviation");
  const detail::PerTypeTables tab = detail::make_tables(s, n_users);
  std::vector<double> per_capita(static_cast<std::size_t>(samples));

  parallel_for_chunks(samples, threads, [&](long long begin, long long end) {
    for (long long i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, kStreamCoopSample, static_cast<std::uint64_t>(i)));
      double sum_tx = 0, sum_l = 0, sum_loc = 0;
      std::uint32_t offloading = 0;
      for (int a = 0; a < n_users; ++a) {
        const std::size_t t =
            static_cast<std::size_t>(detail::draw_type(s.dist, rng.uniform()));
        if (rng.uniform() < pi[t]) {
          sum_tx += tab.tx[t];
          sum_l += tab.lpool[t];
          ++offloading;
        } else {
          sum_loc += tab.loc[t];
        }
      }
      per_capita[static_cast<std::size_t>(i)] =
          (sum_tx + sum_l * static_cast<double>(offloading) + sum_loc) /
          static_cast<double>(n_users);
    }
  });

  double sum = 0;
  for (long long i = 0; i < samples; ++i) sum += per_capita[static_cast<std::size_t>(i)];
  const double mean = sum / static_cast<double>(samples);
  double ss = 0;
  for (long long i = 0; i < samples; ++i) {
    const double d = per_capita[static_cast<std::size_t>(i)] - mean;
    ss += d * d;
  }

  FiniteEvalResult r;
  r.n_users = n_users;
  r.estimate = std::abs(mean - oneshot_objective(s, pi));
  r.standard_error =
      samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1) /
                              static_cast<double>(samples))
                  : 0.0;
  r.samples = samples;
  r.seed = seed;
  return r;
}

}  // namespace offload

#endif  // OFFLOAD_FINITE_SYSTEM_HPP
