#ifndef OFFLOAD_MFC_HPP
#define OFFLOAD_MFC_HPP

// Cooperative (planner) side: minimize the population-average delay over the
// policy cube [0,1]^K. The one-shot objective is an explicit quadratic
//
//   J(pi) = pi' Q pi + c' pi + const,   Q[j][k] = p_j p_k L_j / f_per,
//   c_j = p_j (W_j/R_j - L_j/f_j),      const = sum_j p_j L_j / f_j,
//
// (Q kept unsymmetric exactly as the formula reads; the gradient uses Q + Q').
// The stationary objective has no such closed form, so both regimes go through
// the same pipeline: exhaustive grid search for a global candidate, then a
// projected-gradient polish. Q + Q' is typically indefinite, so the grid stage
// is what buys the "global" in the answer; the polish only sharpens it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "offload/errors.hpp"
#include "offload/model.hpp"

namespace offload {

struct QuadraticProgram {
  std::size_t k = 0;
  std::vector<double> Q;  // row-major k*k
  std::vector<double> c;
  double constant = 0;

  double q(std::size_t i, std::size_t j) const { return Q[i * k + j]; }
};

inline QuadraticProgram assemble_qp(const OneShotScenario& s) {
  const std::size_t k = s.dist.size();
  QuadraticProgram qp;
  qp.k = k;
  qp.Q.assign(k * k, 0.0);
  qp.c.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& atom = s.dist.atoms[j];
    for (std::size_t l = 0; l < k; ++l) {
      qp.Q[j * k + l] = atom.p * s.dist.atoms[l].p * atom.config.L / s.f_per;
    }
    qp.c[j] = atom.p * (transmission_time(atom.config) - local_time(atom.config));
    qp.constant += atom.p * local_time(atom.config);
  }
  return qp;
}

inline void require_aligned(const QuadraticProgram& qp, std::span<const double> x,
                            const char* what) {
  if (qp.k != x.size()) {
    throw AlignmentError(std::string(what) + ": point has " + std::to_string(x.size()) +
                         " entries but the program has " + std::to_string(qp.k) +
                         " variables");
  }
}

inline double qp_objective(const QuadraticProgram& qp, std::span<const double> x) {
  require_aligned(qp, x, "qp_objective");
  double v = qp.constant;
  for (std::size_t i = 0; i < qp.k; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < qp.k; ++j) row += qp.q(i, j) * x[j];
    v += x[i] * row + qp.c[i] * x[i];
  }
  return v;
}

inline double qp_objective(const QuadraticProgram& qp, const Policy& pi) {
  return qp_objective(qp, std::span<const double>(pi.probs));
}

// grad J = (Q + Q') x + c
inline std::vector<double> qp_gradient(const QuadraticProgram& qp, std::span<const double> x) {
  require_aligned(qp, x, "qp_gradient");
  std::vector<double> g(qp.k, 0.0);
  for (std::size_t i = 0; i < qp.k; ++i) {
    double acc = qp.c[i];
    for (std::size_t j = 0; j < qp.k; ++j) acc += (qp.q(i, j) + qp.q(j, i)) * x[j];
    g[i] = acc;
  }
  return g;
}

inline std::vector<double> qp_gradient(const QuadraticProgram& qp, const Policy& pi) {
  return qp_gradient(qp, std::span<const double>(pi.probs));
}

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

struct OptimizeOptions {
  double resolution = 0;      // grid spacing; 0 picks 0.01 for K <= 3, else 0.05
  double max_points = 1e8;    // refuse grids larger than this many evaluations
  bool refine = true;
  double refine_tol = 1e-10;  // stop when the projected-gradient step is this small
  int max_refine_steps = 10000;
};

struct OptimizationResult {
  Policy argmin;
  double value = 0;
  long long evaluations = 0;
  bool refined = false;
};

// Axis 0, r, 2r, ... with the endpoint snapped so that exactly 0 and 1 appear.
inline std::vector<double> grid_axis(double resolution) {
  if (!(resolution > 0) || !(resolution <= 1) || !std::isfinite(resolution)) {
    throw ValidationError("grid resolution must be in (0, 1], got " +
                          std::to_string(resolution));
  }
  const std::size_t steps = static_cast<std::size_t>(1.0 / resolution + 1e-9);
  std::vector<double> axis;
  axis.reserve(steps + 2);
  for (std::size_t i = 0; i <= steps; ++i) {
    double v = static_cast<double>(i) * resolution;
    if (v > 1.0) v = 1.0;
    axis.push_back(v);
  }
  if (axis.back() < 1.0 - 1e-12) axis.push_back(1.0);
  return axis;
}

// Exhaustive sweep of the product grid in lexicographic order (last coordinate
// fastest). Non-finite objective values are skipped; ties keep the first point
// seen, so the reported argmin is deterministic.
inline OptimizationResult grid_search(const Objective& objective, std::size_t k,
                                      double resolution, const OptimizeOptions& opts = {}) {
  if (k == 0) throw ValidationError("grid_search needs at least one dimension");
  if (1.0 / resolution > opts.max_points) {
    throw BudgetError("grid axis alone exceeds the evaluation budget");
  }
  const std::vector<double> axis = grid_axis(resolution);
  const double total = std::pow(static_cast<double>(axis.size()), static_cast<double>(k));
  if (total > opts.max_points) {
    throw BudgetError("grid of " + std::to_string(total) + " points exceeds budget of " +
                      std::to_string(opts.max_points));
  }

  std::vector<std::size_t> idx(k, 0);
  std::vector<double> x(k, axis[0]);
  std::vector<double> best_x;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  long long evals = 0;
  for (;;) {
    const double v = objective(std::span<const double>(x));
    ++evals;
    if (std::isfinite(v) && (!found || v < best)) {
      best = v;
      best_x = x;
      found = true;
    }
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < axis.size()) {
        x[pos] = axis[idx[pos]];
        break;
      }
      idx[pos] = 0;
      x[pos] = axis[0];
      if (pos == 0) {
        if (!found) {
          throw FeasibilityError("objective is not finite anywhere on the grid");
        }
        OptimizationResult r;
        r.argmin = Policy(std::move(best_x));
        r.value = best;
        r.evaluations = evals;
        return r;
      }
    }
  }
}

// Central differences, falling back to a one-sided stencil at the box edge or
// where a probe lands in an infeasible (+inf) region. f_at_x saves a re-eval.
inline std::vector<double> finite_difference_gradient(const Objective& objective,
                                                      std::span<const double> x,
                                                      double f_at_x, double h = 1e-6) {
  std::vector<double> g(x.size(), 0.0);
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double up = std::numeric_limits<double>::infinity();
    double dn = std::numeric_limits<double>::infinity();
    const bool can_up = x[i] + h <= 1.0;
    const bool can_dn = x[i] - h >= 0.0;
    if (can_up) {
      probe[i] = x[i] + h;
      up = objective(std::span<const double>(probe));
    }
    if (can_dn) {
      probe[i] = x[i] - h;
      dn = objective(std::span<const double>(probe));
    }
    probe[i] = x[i];
    if (std::isfinite(up) && std::isfinite(dn)) {
      g[i] = (up - dn) / (2 * h);
    } else if (std::isfinite(up)) {
      g[i] = (up - f_at_x) / h;
    } else if (std::isfinite(dn)) {
      g[i] = (f_at_x - dn) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

namespace detail {
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
}  // namespace detail

// Projected-gradient descent on the cube with Armijo backtracking. `gradient`
// may be empty, in which case finite differences are used. Monotone in the
// objective by construction, so the result never loses to its start point.
inline OptimizationResult refine_local(const Objective& objective, const Gradient& gradient,
                                       const Policy& start, double tol = 1e-10,
                                       int max_steps = 10000) {
  std::vector<double> x = start.probs;
  double fx = objective(std::span<const double>(x));
  long long evals = 1;
  if (!std::isfinite(fx)) {
    OptimizationResult r;
    r.argmin = start;
    r.value = fx;
    r.evaluations = evals;
    return r;
  }

  std::vector<double> y(x.size());
  for (int step = 0; step < max_steps; ++step) {
    const std::vector<double> g =
        gradient ? gradient(std::span<const double>(x))
                 : finite_difference_gradient(objective, std::span<const double>(x), fx);
    if (!gradient) evals += 2 * static_cast<long long>(x.size());

    double move = 0;  // sup-norm of the unit projected step; 0 means KKT point
    for (std::size_t i = 0; i < x.size(); ++i) {
      move = std::max(move, std::abs(detail::clamp01(x[i] - g[i]) - x[i]));
    }
    if (move <= tol) break;

    bool improved = false;
    for (double t = 1.0; t >= 1e-14; t /= 2) {
      double gdot = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = detail::clamp01(x[i] - t * g[i]);
        gdot += g[i] * (y[i] - x[i]);
      }
      const double fy = objective(std::span<const double>(y));
      ++evals;
      if (std::isfinite(fy) && fy <= fx + 1e-4 * gdot) {
        x.swap(y);
        fx = fy;
        improved = true;
        break;
      }
    }
    if (!improved) break;  // no step length makes progress; numerically done
  }

  OptimizationResult r;
  r.argmin = Policy(std::move(x));
  r.value = fx;
  r.evaluations = evals;
  r.refined = true;
  return r;
}

// The grid spacing actually used for a K-type sweep: an explicit request wins,
// otherwise fine (0.01) up to three types and coarse (0.05) beyond that.
inline double effective_resolution(std::size_t k, const OptimizeOptions& opts) {
  return opts.resolution > 0 ? opts.resolution : (k <= 3 ? 0.01 : 0.05);
}

// Global-candidate grid sweep plus local polish, with the final value always
// re-read from the model formulas rather than from whatever surrogate the
// optimizer iterated on.
inline OptimizationResult solve_mfc(const Scenario& scenario, OptimizeOptions opts = {}) {
  const std::size_t k = distribution(scenario).size();
  const double resolution = effective_resolution(k, opts);

  Objective objective;
  Gradient gradient;  // empty => finite differences
  if (game_mode(scenario) == GameMode::OneShot) {
    const auto& s = std::get<OneShotScenario>(scenario);
    auto qp = std::make_shared<const QuadraticProgram>(assemble_qp(s));
    objective = [qp](std::span<const double> x) { return qp_objective(*qp, x); };
    gradient = [qp](std::span<const double> x) { return qp_gradient(*qp, x); };
  } else {
    const auto& s = std::get<StationaryScenario>(scenario);
    objective = [&s](std::span<const double> x) { return stationary_objective_or_inf(s, x); };
  }

  OptimizationResult result = grid_search(objective, k, resolution, opts);
  if (opts.refine) {
    OptimizationResult polished =
        refine_local(objective, gradient, result.argmin, opts.refine_tol,
                     opts.max_refine_steps);
    polished.evaluations += result.evaluations;
    result = std::move(polished);
  }

  // report the authoritative value at the argmin
  result.value = game_mode(scenario) == GameMode::OneShot
                     ? oneshot_objective(std::get<OneShotScenario>(scenario),
                                         std::span<const double>(result.argmin.probs))
                     : stationary_objective_or_inf(
                           std::get<StationaryScenario>(scenario),
                           std::span<const double>(result.argmin.probs));
  return result;
}

}  // namespace offload

#endif  // OFFLOAD_MFC_HPP
