#ifndef OFFLOAD_MODEL_HPP
#define OFFLOAD_MODEL_HPP

// Core types and cost formulas for the edge task-offloading game.
//
// A large population of devices decides, per task, between running locally and
// offloading to a shared edge pool. A device type is a Configuration (upload
// size W, workload L, local speed f, uplink rate R); the population is a finite
// SupportDistribution over types; a Policy gives each type its offload
// probability. Two regimes share these types:
//
//  - one-shot: every device holds exactly one task at t = 0. An offloaded task
//    uploads for W/R and then the pool (f_per cycles/s per device) is split
//    evenly over the offloaded mass m = E[pi], so processing takes L*m/f_per.
//  - stationary: tasks arrive as a Poisson stream with per-device rate lambda.
//    Writing A = E[pi W/R] and B = E[pi L], the standing per-job bandwidth
//    solves f_alloc = f_per / (lambda A + lambda B / f_alloc), i.e.
//    f_alloc = (f_per - lambda B) / (lambda A), defined while the load is
//    feasible (f_per - lambda B > 0) and somebody offloads (A > 0).
//
// Everything here is a pure function of its arguments; policies bind to the
// distribution by index, and combining a policy with a distribution of a
// different length is an AlignmentError.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "offload/errors.hpp"

namespace offload {

inline constexpr double kProbSumTol = 1e-12;  // |sum p - 1| allowed; never renormalize

// One device type. All four fields must be strictly positive and finite.
struct Configuration {
  double W = 0;  // upload size [bits]
  double L = 0;  // processing workload [cycles]
  double f = 0;  // local CPU speed [cycles/s]
  double R = 0;  // uplink rate [bits/s]
};

inline void validate(const Configuration& c, std::size_t index) {
  const struct { const char* name; double v; } fields[] = {
      {"W", c.W}, {"L", c.L}, {"f", c.f}, {"R", c.R}};
  for (const auto& fl : fields) {
    if (!(fl.v > 0) || !std::isfinite(fl.v)) {
      throw ValidationError("configuration " + std::to_string(index) + ": field " +
                            fl.name + " must be positive and finite, got " +
                            std::to_string(fl.v));
    }
  }
}

// Ordered, finite-support type distribution. Probabilities must be positive
// ... well, nonnegative and finite, and sum to 1 within kProbSumTol; a bad sum
// is a hard error by design so that silently renormalized inputs cannot leak
// into published numbers.
struct SupportDistribution {
  struct Atom {
    double p = 0;
    Configuration config;
  };

  std::vector<Atom> atoms;

  SupportDistribution() = default;

  explicit SupportDistribution(std::vector<Atom> a) : atoms(std::move(a)) {
    if (atoms.empty()) throw ValidationError("support distribution needs at least one type");
    double sum = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double p = atoms[i].p;
      if (!(p >= 0) || !std::isfinite(p)) {
        throw ValidationError("type " + std::to_string(i) +
                              ": probability must be in [0, 1], got " + std::to_string(p));
      }
      validate(atoms[i].config, i);
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol) {
      throw ValidationError("type probabilities sum to " + std::to_string(sum) +
                            ", expected 1 within 1e-12 (no renormalization)");
    }
  }

  std::size_t size() const { return atoms.size(); }
};

// Per-type offload probabilities, index-aligned with a SupportDistribution.
struct Policy {
  std::vector<double> probs;

  Policy() = default;

  explicit Policy(std::vector<double> pr) : probs(std::move(pr)) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
        throw ValidationError("policy entry " + std::to_string(i) +
                              " must be in [0, 1], got " + std::to_string(probs[i]));
      }
    }
  }

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

inline Policy zeros_policy(std::size_t k) { return Policy(std::vector<double>(k, 0.0)); }

inline void require_aligned(const SupportDistribution& dist, const Policy& pi,
                            const char* what) {
  if (dist.size() != pi.size()) {
    throw AlignmentError(std::string(what) + ": policy has " + std::to_string(pi.size()) +
                         " entries but the distribution has " + std::to_string(dist.size()) +
                         " types");
  }
}

// ---------------------------------------------------------------------------
// Scenarios

struct OneShotScenario {
  SupportDistribution dist;
  double f_per = 0;  // edge pool capacity per device [cycles/s]

  OneShotScenario(SupportDistribution d, double f_per_arg)
      : dist(std::move(d)), f_per(f_per_arg) {
    if (!(f_per > 0) || !std::isfinite(f_per)) {
      throw ValidationError("f_per must be positive and finite, got " + std::to_string(f_per));
    }
  }
};

struct StationaryScenario {
  SupportDistribution dist;
  double f_per = 0;    // edge pool capacity per device [cycles/s]
  double lambda = 0;   // per-device task arrival rate [1/s]

  StationaryScenario(SupportDistribution d, double f_per_arg, double lambda_arg)
      : dist(std::move(d)), f_per(f_per_arg), lambda(lambda_arg) {
    if (!(f_per > 0) || !std::isfinite(f_per)) {
      throw ValidationError("f_per must be positive and finite, got " + std::to_string(f_per));
    }
    if (!(lambda > 0) || !std::isfinite(lambda)) {
      throw ValidationError("lambda must be positive and finite, got " + std::to_string(lambda));
    }
  }
};

enum class GameMode { OneShot, Stationary };

using Scenario = std::variant<OneShotScenario, StationaryScenario>;

inline GameMode game_mode(const Scenario& s) {
  return std::holds_alternative<OneShotScenario>(s) ? GameMode::OneShot
                                                    : GameMode::Stationary;
}

inline const SupportDistribution& distribution(const Scenario& s) {
  return std::visit([](const auto& sc) -> const SupportDistribution& { return sc.dist; }, s);
}

// ---------------------------------------------------------------------------
// Timing primitives

inline double transmission_time(const Configuration& c) { return c.W / c.R; }
inline double local_time(const Configuration& c) { return c.L / c.f; }

namespace detail {
// Inverse-CDF type draw from one uniform in [0, 1).
inline int draw_type(const SupportDistribution& dist, double u) {
  double cum = 0;
  for (std::size_t j = 0; j + 1 < dist.size(); ++j) {
    cum += dist.atoms[j].p;
    if (u < cum) return static_cast<int>(j);
  }
  return static_cast<int>(dist.size()) - 1;
}
}  // namespace detail

// E[pi] under the type distribution: the fraction of tasks that offload.
inline double offload_mass(const SupportDistribution& dist, const Policy& pi) {
  require_aligned(dist, pi, "offload_mass");
  double m = 0;
  for (std::size_t j = 0; j < dist.size(); ++j) m += dist.atoms[j].p * pi[j];
  return m;
}

// Span overloads below serve optimizer and simulator inner loops, where the
// caller guarantees entries already live in [0, 1] and a Policy allocation per
// evaluation would dominate the profile. Alignment is still checked.

inline void require_aligned(const SupportDistribution& dist, std::span<const double> pi,
                            const char* what) {
  if (dist.size() != pi.size()) {
    throw AlignmentError(std::string(what) + ": policy has " + std::to_string(pi.size()) +
                         " entries but the distribution has " + std::to_string(dist.size()) +
                         " types");
  }
}

inline double oneshot_objective(const OneShotScenario& s, std::span<const double> pi) {
  require_aligned(s.dist, pi, "oneshot_objective");
  double m = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) m += s.dist.atoms[j].p * pi[j];
  const double edge_factor = m / s.f_per;
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const auto& atom = s.dist.atoms[j];
    const double off = transmission_time(atom.config) + atom.config.L * edge_factor;
    total += atom.p * (pi[j] * off + (1.0 - pi[j]) * local_time(atom.config));
  }
  return total;
}

// Stationary population cost, with infeasible loads priced at +infinity so
// optimizers can sweep the whole cube without exception plumbing.
inline double stationary_objective_or_inf(const StationaryScenario& s,
                                          std::span<const double> pi) {
  require_aligned(s.dist, pi, "stationary_objective_or_inf");
  double a = 0, b = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const auto& atom = s.dist.atoms[j];
    a += atom.p * pi[j] * transmission_time(atom.config);
    b += atom.p * pi[j] * atom.config.L;
  }
  const double headroom = s.f_per - s.lambda * b;
  if (!(headroom > 0)) return std::numeric_limits<double>::infinity();
  const double edge_delay_per_cycle = s.lambda * a / headroom;
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const auto& atom = s.dist.atoms[j];
    const double off =
        transmission_time(atom.config) + atom.config.L * edge_delay_per_cycle;
    total += atom.p * (pi[j] * off + (1.0 - pi[j]) * local_time(atom.config));
  }
  return total;
}

// ---------------------------------------------------------------------------
// One-shot costs

struct TypeCosts {
  double offload = 0;
  double local = 0;
};

// Expected delay of each type against the mean field induced by `pop`:
// offload = W/R + L*m/f_per with m the population offload mass, local = L/f.
inline std::vector<TypeCosts> oneshot_type_costs(const OneShotScenario& s, const Policy& pop) {
  require_aligned(s.dist, pop, "oneshot_type_costs");
  const double m = offload_mass(s.dist, pop);
  std::vector<TypeCosts> out(s.dist.size());
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const Configuration& c = s.dist.atoms[j].config;
    out[j].offload = transmission_time(c) + c.L * m / s.f_per;
    out[j].local = local_time(c);
  }
  return out;
}

// Population-average delay when everyone follows pi.
inline double oneshot_objective(const OneShotScenario& s, const Policy& pi) {
  const std::vector<TypeCosts> costs = oneshot_type_costs(s, pi);
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    total += s.dist.atoms[j].p *
             (pi[j] * costs[j].offload + (1.0 - pi[j]) * costs[j].local);
  }
  return total;
}

// Expected delay of a single deviator playing `dev` while the population plays
// `pop`. Linear in dev; the deviator's own choice does not move the mean field.
inline double deviator_oneshot_cost(const OneShotScenario& s, const Policy& dev,
                                    const Policy& pop) {
  require_aligned(s.dist, dev, "deviator_oneshot_cost");
  const std::vector<TypeCosts> costs = oneshot_type_costs(s, pop);
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    total += s.dist.atoms[j].p *
             (dev[j] * costs[j].offload + (1.0 - dev[j]) * costs[j].local);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Stationary costs

// (A, B) = (E[pi W/R], E[pi L]): upload-load and work-load of the offloading
// stream per unit arrival rate.
inline std::pair<double, double> offload_load(const StationaryScenario& s, const Policy& pi) {
  require_aligned(s.dist, pi, "offload_load");
  double a = 0, b = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const auto& atom = s.dist.atoms[j];
    a += atom.p * pi[j] * transmission_time(atom.config);
    b += atom.p * pi[j] * atom.config.L;
  }
  return {a, b};
}

inline bool stationary_feasible(const StationaryScenario& s, const Policy& pi) {
  const auto [a, b] = offload_load(s, pi);
  (void)a;
  return s.f_per - s.lambda * b > 0;
}

// Standing bandwidth per offloaded job: (f_per - lambda B) / (lambda A).
// Requires a feasible load and a policy under which somebody offloads.
inline double stationary_f_alloc(const StationaryScenario& s, const Policy& pi) {
  const auto [a, b] = offload_load(s, pi);
  const double headroom = s.f_per - s.lambda * b;
  if (!(headroom > 0)) {
    throw FeasibilityError("stationary load infeasible: f_per - lambda*E[pi L] = " +
                           std::to_string(headroom) + " <= 0");
  }
  if (a == 0) {
    throw DegeneratePolicyError("f_alloc undefined: offload mass is zero");
  }
  return headroom / (s.lambda * a);
}

// Per-type delays against the mean field of `pop`. The edge delay factor
// lambda*A/(f_per - lambda*B) equals L/f_alloc per unit workload and is 0 when
// nobody offloads (an entering deviator then has the pool to itself).
inline std::vector<TypeCosts> stationary_type_costs(const StationaryScenario& s,
                                                    const Policy& pop) {
  require_aligned(s.dist, pop, "stationary_type_costs");
  const auto [a, b] = offload_load(s, pop);
  const double headroom = s.f_per - s.lambda * b;
  if (!(headroom > 0)) {
    throw FeasibilityError("stationary load infeasible: f_per - lambda*E[pi L] = " +
                           std::to_string(headroom) + " <= 0");
  }
  const double edge_delay_per_cycle = s.lambda * a / headroom;  // 0 when a == 0
  std::vector<TypeCosts> out(s.dist.size());
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    const Configuration& c = s.dist.atoms[j].config;
    out[j].offload = transmission_time(c) + c.L * edge_delay_per_cycle;
    out[j].local = local_time(c);
  }
  return out;
}

inline double stationary_objective(const StationaryScenario& s, const Policy& pi) {
  const std::vector<TypeCosts> costs = stationary_type_costs(s, pi);
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    total += s.dist.atoms[j].p *
             (pi[j] * costs[j].offload + (1.0 - pi[j]) * costs[j].local);
  }
  return total;
}

inline double deviator_stationary_cost(const StationaryScenario& s, const Policy& dev,
                                       const Policy& pop) {
  require_aligned(s.dist, dev, "deviator_stationary_cost");
  const std::vector<TypeCosts> costs = stationary_type_costs(s, pop);
  double total = 0;
  for (std::size_t j = 0; j < s.dist.size(); ++j) {
    total += s.dist.atoms[j].p *
             (dev[j] * costs[j].offload + (1.0 - dev[j]) * costs[j].local);
  }
  return total;
}

}  // namespace offload

#endif  // OFFLOAD_MODEL_HPP
