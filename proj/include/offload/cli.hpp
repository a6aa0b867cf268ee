#ifndef OFFLOAD_CLI_HPP
#define OFFLOAD_CLI_HPP

// Command-line front end. Subcommands: solve-mfg, solve-mfc, simulate,
// finite-eval, rerun. Every data command writes the CSV named by --out plus
// <base>.summary.json and <base>.manifest.json beside it. CSVs start with a
// "# schema <name> v1" line, print doubles with %.17g, and contain no
// wall-clock values, so a rerun from the manifest reproduces them byte for
// byte at any --threads setting. Exit codes: 0 success, 2 validation
// problem, 3 infeasibility or an equilibrium that failed to converge.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "offload/errors.hpp"
#include "offload/finite_system.hpp"
#include "offload/mfc.hpp"
#include "offload/mfg.hpp"
#include "offload/model.hpp"
#include "offload/queue_sim.hpp"
#include "offload/rng.hpp"
#include "offload/scenario_io.hpp"
#include "offload/version.hpp"

namespace offload::cli {

using json = nlohmann::json;

inline std::string g17(double v) { return offload::detail::format_double_exact(v); }

struct OutPaths {
  std::string csv, summary, manifest;
};

inline OutPaths out_paths(const std::string& out) {
  const std::filesystem::path p(out);
  const std::string base = (p.parent_path() / p.stem()).string();
  return {out, base + ".summary.json", base + ".manifest.json"};
}

// --policy accepts either comma-separated decimals or a path to a solver
// summary (reads its "policy" or "argmin" array), so solve output pipes
// straight into simulate / finite-eval.
inline std::vector<double> parse_policy_values(const std::string& spec) {
  std::vector<double> values;
  bool plain = !spec.empty();
  std::size_t pos = 0;
  while (plain && pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string_view token =
        offload::detail::trim(std::string_view(spec).substr(pos, comma - pos));
    double v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      plain = false;
      break;
    }
    values.push_back(v);
    pos = comma + 1;
  }
  if (plain) return values;

  std::ifstream in(spec, std::ios::binary);
  if (!in) {
    throw ValidationError("--policy: '" + spec +
                          "' is neither a comma-separated number list nor a readable file");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("--policy: " + spec + ": " + e.what());
  }
  const char* key = j.contains("policy") ? "policy" : j.contains("argmin") ? "argmin" : nullptr;
  if (!key || !j[key].is_array()) {
    throw ValidationError("--policy: " + spec + ": no 'policy' or 'argmin' array found");
  }
  values.clear();
  for (const auto& e : j[key]) {
    if (!e.is_number()) throw ValidationError("--policy: " + spec + ": non-numeric entry");
    values.push_back(e.get<double>());
  }
  return values;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// manifest: everything rerun needs, plus bookkeeping for humans
inline void write_manifest(const std::string& path, const std::string& command,
                           const std::vector<std::string>& argv, const json& parameters,
                           std::uint64_t seed, const std::vector<std::string>& outputs,
                           double duration_seconds) {
  json m;
  m["schema"] = "offload-manifest v1";
  m["artifact_version"] = kVersion;
  m["command"] = command;
  m["argv"] = argv;
  m["parameters"] = parameters;
  m["seed"] = seed;
  m["outputs"] = outputs;
  m["duration_seconds"] = duration_seconds;
  write_json_file(path, m);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

inline void check_threads(int threads) {
  if (threads < 1) throw ValidationError("--threads must be at least 1");
}

}  // namespace detail

struct MfgArgs {
  std::string scenario, out;
  int iters = 5000;
  // averaged fictitious play closes the gap like 1/n, so demanding much more
  // than 1e-3 within the default iteration cap would always exit nonzero
  double tol = 1e-3;
};

inline int run_solve_mfg(const MfgArgs& a, const std::vector<std::string>& argv) {
  detail::Stopwatch clock;
  const Scenario sc = parse_scenario(a.scenario);
  FictitiousPlayOptions opts;
  opts.max_iters = a.iters;
  opts.tol = a.tol;

  FictitiousPlayReport rep;
  std::string failure;
  try {
    rep = fictitious_play(sc, opts);
  } catch (const FictitiousPlayInfeasible& e) {
    rep = e.partial;
    failure = e.what();
  }

  const std::size_t k = distribution(sc).size();
  std::string csv = "# schema mfg-history v1\niteration,exploitability";
  for (std::size_t j = 0; j < k; ++j) csv += ",pi_" + std::to_string(j);
  csv += '\n';
  for (std::size_t i = 0; i < rep.history.size(); ++i) {
    std::vector<std::string> cells{std::to_string(rep.history[i].iteration),
                                   g17(rep.history[i].exploitability)};
    for (double p : rep.policy_history[i].probs) cells.push_back(g17(p));
    csv += detail::join_csv(cells);
  }

  const OutPaths paths = out_paths(a.out);
  detail::write_text_file(paths.csv, csv);

  json summary;
  summary["schema"] = "mfg-summary v1";
  summary["scenario"] = a.scenario;
  summary["mode"] = game_mode(sc) == GameMode::OneShot ? "oneshot" : "stationary";
  summary["policy"] = rep.final_policy.probs;
  summary["iterations"] = rep.iterations_run;
  summary["converged"] = rep.converged;
  if (rep.history.empty()) {
    summary["final_exploitability"] = nullptr;
  } else {
    summary["final_exploitability"] = rep.history.back().exploitability;
  }
  summary["tol"] = a.tol;
  summary["max_iters"] = a.iters;
  if (!failure.empty()) summary["error"] = failure;
  summary["duration_seconds"] = clock.seconds();
  detail::write_json_file(paths.summary, summary);

  json params{{"scenario", a.scenario}, {"out", a.out}, {"iters", a.iters}, {"tol", a.tol}};
  detail::write_manifest(paths.manifest, "solve-mfg", argv, params, 0,
                         {paths.csv, paths.summary}, clock.seconds());

  if (!failure.empty()) {
    std::cerr << "error: " << failure << "\n";
    return 3;
  }
  if (!rep.converged) {
    std::cerr << "error: no convergence after " << rep.iterations_run
              << " iterations (tol " << g17(a.tol) << ")\n";
    return 3;
  }
  return 0;
}

struct MfcArgs {
  std::string scenario, out, lattice;
  double resolution = 0;  // 0 = pick by support size
  bool no_refine = false;
};

inline int run_solve_mfc(const MfcArgs& a, const std::vector<std::string>& argv) {
  detail::Stopwatch clock;
  const Scenario sc = parse_scenario(a.scenario);
  const std::size_t k = distribution(sc).size();

  OptimizeOptions opts;
  opts.resolution = a.resolution;
  opts.refine = !a.no_refine;
  const OptimizationResult result = solve_mfc(sc, opts);

  std::string csv = "# schema mfc-solution v1\nvalue,evaluations,refined";
  for (std::size_t j = 0; j < k; ++j) csv += ",pi_" + std::to_string(j);
  csv += '\n';
  std::vector<std::string> cells{g17(result.value), std::to_string(result.evaluations),
                                 result.refined ? "1" : "0"};
  for (double p : result.argmin.probs) cells.push_back(g17(p));
  csv += detail::join_csv(cells);

  const OutPaths paths = out_paths(a.out);
  detail::write_text_file(paths.csv, csv);
  std::vector<std::string> outputs{paths.csv, paths.summary};

  if (!a.lattice.empty()) {
    // full objective surface on the same grid the solver swept
    if (k > 2) {
      throw ValidationError("--lattice supports at most 2 types, scenario has " +
                            std::to_string(k));
    }
    const double res = effective_resolution(k, opts);
    const std::vector<double> axis = grid_axis(res);
    std::string lat = "# schema mfc-lattice v1\n";
    lat += k == 1 ? "pi_0,value\n" : "pi_0,pi_1,value\n";
    const auto value_at = [&](std::span<const double> x) {
      return game_mode(sc) == GameMode::OneShot
                 ? oneshot_objective(std::get<OneShotScenario>(sc), x)
                 : stationary_objective_or_inf(std::get<StationaryScenario>(sc), x);
    };
    if (k == 1) {
      for (double v0 : axis) {
        const double x[1] = {v0};
        lat += detail::join_csv({g17(v0), g17(value_at(x))});
      }
    } else {
      for (double v0 : axis) {
        for (double v1 : axis) {
          const double x[2] = {v0, v1};
          lat += detail::join_csv({g17(v0), g17(v1), g17(value_at(x))});
        }
      }
    }
    detail::write_text_file(a.lattice, lat);
    outputs.push_back(a.lattice);
  }

  json summary;
  summary["schema"] = "mfc-summary v1";
  summary["scenario"] = a.scenario;
  summary["mode"] = game_mode(sc) == GameMode::OneShot ? "oneshot" : "stationary";
  summary["argmin"] = result.argmin.probs;
  summary["value"] = result.value;
  summary["evaluations"] = result.evaluations;
  summary["refined"] = result.refined;
  summary["resolution"] = effective_resolution(k, opts);
  summary["duration_seconds"] = clock.seconds();
  detail::write_json_file(paths.summary, summary);

  json params{{"scenario", a.scenario},
              {"out", a.out},
              {"resolution", a.resolution},
              {"refine", !a.no_refine}};
  if (!a.lattice.empty()) params["lattice"] = a.lattice;
  detail::write_manifest(paths.manifest, "solve-mfc", argv, params, 0, outputs,
                         clock.seconds());
  return 0;
}

struct SimArgs {
  std::string scenario, out, policy, event_log;
  std::vector<int> n_list{5, 10, 25, 50, 100};
  long long trajectories = 5000;
  double horizon = 0;  // 0 = 40 / lambda
  int grid_points = 200;
  std::uint64_t seed = 1;
  int threads = 1;
};

inline int run_simulate(const SimArgs& a, const std::vector<std::string>& argv) {
  detail::Stopwatch clock;
  detail::check_threads(a.threads);
  const Scenario sc = parse_scenario(a.scenario);
  const auto* st = std::get_if<StationaryScenario>(&sc);
  if (!st) {
    throw ValidationError("simulate needs a stationary scenario; '" + a.scenario +
                          "' is one-shot");
  }
  const Policy pi(parse_policy_values(a.policy));
  require_aligned(st->dist, pi, "simulate");
  if (a.n_list.empty()) throw ValidationError("-N list must not be empty");
  for (int n : a.n_list) {
    if (n < 1) throw ValidationError("-N entries must be at least 1");
  }
  if (!a.event_log.empty() && a.n_list.size() != 1) {
    throw ValidationError("--event-log needs exactly one -N value");
  }
  const double horizon = a.horizon > 0 ? a.horizon : 40.0 / st->lambda;
  if (!(horizon > 0) || !std::isfinite(horizon)) {
    throw ValidationError("--horizon must be positive and finite");
  }
  const std::vector<double> grid = uniform_grid(horizon, a.grid_points);
  const double prediction = stationary_prediction(*st, pi);

  std::string csv = "# schema sim-ensemble v1\nn,time,mean_ntot_over_n,ci68_halfwidth,prediction\n";
  json rows = json::array();
  for (std::size_t idx = 0; idx < a.n_list.size(); ++idx) {
    const int n = a.n_list[idx];
    const std::uint64_t seed_n = derive_seed(a.seed, kStreamNSweep, idx);
    const TrajectoryEnsemble ens =
        run_ensemble(*st, pi, n, horizon, grid, a.trajectories, seed_n, a.threads);
    double tail = 0;
    const std::size_t half = grid.size() / 2;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      csv += detail::join_csv({std::to_string(n), g17(grid[gi]),
                               g17(ens.mean_ntot_over_n[gi]), g17(ens.ci68_halfwidth[gi]),
                               g17(prediction)});
      if (gi >= half) tail += ens.mean_ntot_over_n[gi];
    }
    rows.push_back({{"n", n},
                    {"second_half_mean", tail / static_cast<double>(grid.size() - half)}});
  }

  const OutPaths paths = out_paths(a.out);
  detail::write_text_file(paths.csv, csv);
  std::vector<std::string> outputs{paths.csv, paths.summary};

  if (!a.event_log.empty()) {
    // the log replays trajectory 0 of the (single) requested ensemble
    std::vector<QueueEvent> events;
    const std::uint64_t seed_n = derive_seed(a.seed, kStreamNSweep, 0);
    simulate_trajectory(*st, pi, a.n_list[0], horizon, grid,
                        derive_seed(seed_n, kStreamTrajectory, 0), &events);
    std::string log = "# schema sim-events v1\ntime,job,kind,pool_after,in_system_after,type,offloaded\n";
    for (const auto& e : events) {
      log += detail::join_csv({g17(e.time), std::to_string(e.job), to_string(e.kind),
                               std::to_string(e.pool_after),
                               std::to_string(e.in_system_after),
                               std::to_string(e.type_index), e.offloaded ? "1" : "0"});
    }
    detail::write_text_file(a.event_log, log);
    outputs.push_back(a.event_log);
  }

  json summary;
  summary["schema"] = "sim-summary v1";
  summary["scenario"] = a.scenario;
  summary["policy"] = pi.probs;
  summary["prediction"] = prediction;
  summary["horizon"] = horizon;
  summary["trajectories"] = a.trajectories;
  summary["rows"] = rows;
  summary["duration_seconds"] = clock.seconds();
  detail::write_json_file(paths.summary, summary);

  json params{{"scenario", a.scenario}, {"out", a.out},
              {"policy", pi.probs},     {"n_list", a.n_list},
              {"trajectories", a.trajectories}, {"horizon", horizon},
              {"grid_points", a.grid_points},   {"seed", a.seed},
              {"threads", a.threads}};
  if (!a.event_log.empty()) params["event_log"] = a.event_log;
  detail::write_manifest(paths.manifest, "simulate", argv, params, a.seed, outputs,
                         clock.seconds());
  return 0;
}

struct EvalArgs {
  std::string scenario, out, policy;
  std::string mode = "exploitability";
  std::vector<int> n_list{5, 10, 25, 50, 100};
  long long samples = 0;  // 0 = 100000 (exploitability) / 20000 (coop-deviation)
  std::uint64_t seed = 1;
  int threads = 1;
};

inline int run_finite_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  detail::Stopwatch clock;
  detail::check_threads(a.threads);
  const Scenario sc = parse_scenario(a.scenario);
  const auto* os = std::get_if<OneShotScenario>(&sc);
  if (!os) {
    throw ValidationError("finite-eval needs a one-shot scenario; '" + a.scenario +
                          "' is stationary");
  }
  const Policy pi(parse_policy_values(a.policy));
  require_aligned(os->dist, pi, "finite-eval");
  if (a.n_list.empty()) throw ValidationError("-N list must not be empty");
  const bool coop = a.mode == "coop-deviation";
  const long long samples = a.samples > 0 ? a.samples : (coop ? 20000 : 100000);

  std::string csv = "# schema finite-eval v1\nn,estimate,standard_error,samples\n";
  json rows = json::array();
  for (std::size_t idx = 0; idx < a.n_list.size(); ++idx) {
    const std::uint64_t seed_n = derive_seed(a.seed, kStreamNSweep, idx);
    const FiniteEvalResult r =
        coop ? estimate_coop_deviation(*os, pi, a.n_list[idx], samples, seed_n, a.threads)
             : estimate_exploitability_n(*os, pi, a.n_list[idx], samples, seed_n, a.threads);
    csv += detail::join_csv({std::to_string(r.n_users), g17(r.estimate),
                             g17(r.standard_error), std::to_string(r.samples)});
    rows.push_back({{"n", r.n_users},
                    {"estimate", r.estimate},
                    {"standard_error", r.standard_error}});
  }

  const OutPaths paths = out_paths(a.out);
  detail::write_text_file(paths.csv, csv);

  json summary;
  summary["schema"] = "finite-eval-summary v1";
  summary["scenario"] = a.scenario;
  summary["policy"] = pi.probs;
  summary["mode"] = a.mode;
  summary["samples"] = samples;
  summary["rows"] = rows;
  summary["duration_seconds"] = clock.seconds();
  detail::write_json_file(paths.summary, summary);

  json params{{"scenario", a.scenario}, {"out", a.out},   {"policy", pi.probs},
              {"n_list", a.n_list},     {"mode", a.mode}, {"samples", samples},
              {"seed", a.seed},         {"threads", a.threads}};
  detail::write_manifest(paths.manifest, "finite-eval", argv, params, a.seed,
                         {paths.csv, paths.summary}, clock.seconds());
  return 0;
}

int run_args(const std::vector<std::string>& args);

// Rebuild the stored command from its manifest and dispatch it again. The
// parameters hold resolved values (policy numbers, horizon, sample counts),
// so the outputs cannot drift even if the files --policy pointed at changed.
inline int run_rerun(const std::string& manifest_path, int threads_override) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open manifest '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_path + ": " + e.what());
  }
  if (!m.contains("schema") || m["schema"] != "offload-manifest v1") {
    throw ValidationError("manifest " + manifest_path + ": unknown schema");
  }
  if (!m.contains("command") || !m.contains("parameters")) {
    throw ValidationError("manifest " + manifest_path + ": missing command or parameters");
  }
  const std::string command = m["command"].get<std::string>();
  const json& p = m["parameters"];
  const auto need = [&](const char* key) -> const json& {
    if (!p.contains(key)) {
      throw ValidationError("manifest " + manifest_path + ": parameters lack '" +
                            std::string(key) + "'");
    }
    return p[key];
  };
  const auto join_doubles = [](const json& arr) {
    std::string s;
    for (const auto& v : arr) {
      if (!s.empty()) s += ',';
      s += g17(v.get<double>());
    }
    return s;
  };
  const auto join_ints = [](const json& arr) {
    std::string s;
    for (const auto& v : arr) {
      if (!s.empty()) s += ',';
      s += std::to_string(v.get<long long>());
    }
    return s;
  };

  std::vector<std::string> args{command, need("scenario").get<std::string>(), "--out",
                                need("out").get<std::string>()};
  if (command == "solve-mfg") {
    args.insert(args.end(), {"--iters", std::to_string(need("iters").get<long long>()),
                             "--tol", g17(need("tol").get<double>())});
  } else if (command == "solve-mfc") {
    const double res = need("resolution").get<double>();
    if (res > 0) args.insert(args.end(), {"--resolution", g17(res)});
    if (!need("refine").get<bool>()) args.push_back("--no-refine");
    if (p.contains("lattice")) {
      args.insert(args.end(), {"--lattice", p["lattice"].get<std::string>()});
    }
  } else if (command == "simulate") {
    args.insert(args.end(),
                {"--policy", join_doubles(need("policy")), "-N", join_ints(need("n_list")),
                 "--trajectories", std::to_string(need("trajectories").get<long long>()),
                 "--horizon", g17(need("horizon").get<double>()), "--grid-points",
                 std::to_string(need("grid_points").get<long long>()), "--seed",
                 std::to_string(need("seed").get<std::uint64_t>()), "--threads",
                 std::to_string(threads_override > 0 ? threads_override
                                                     : need("threads").get<long long>())});
    if (p.contains("event_log")) {
      args.insert(args.end(), {"--event-log", p["event_log"].get<std::string>()});
    }
  } else if (command == "finite-eval") {
    args.insert(args.end(),
                {"--policy", join_doubles(need("policy")), "-N", join_ints(need("n_list")),
                 "--mode", need("mode").get<std::string>(), "--samples",
                 std::to_string(need("samples").get<long long>()), "--seed",
                 std::to_string(need("seed").get<std::uint64_t>()), "--threads",
                 std::to_string(threads_override > 0 ? threads_override
                                                     : need("threads").get<long long>())});
  } else {
    throw ValidationError("manifest " + manifest_path + ": unknown command '" + command + "'");
  }
  return run_args(args);
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"mean-field task-offloading solvers and simulators"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  MfgArgs mfg;
  auto* c_mfg = app.add_subcommand("solve-mfg",
                                   "fictitious play toward an equilibrium policy");
  c_mfg->add_option("scenario", mfg.scenario, "scenario file")->required();
  c_mfg->add_option("--out", mfg.out, "output CSV path")->required();
  c_mfg->add_option("--iters", mfg.iters, "iteration cap")->capture_default_str();
  c_mfg->add_option("--tol", mfg.tol, "exploitability target")->capture_default_str();

  MfcArgs mfc;
  auto* c_mfc = app.add_subcommand("solve-mfc", "grid search + polish for the planner policy");
  c_mfc->add_option("scenario", mfc.scenario, "scenario file")->required();
  c_mfc->add_option("--out", mfc.out, "output CSV path")->required();
  c_mfc->add_option("--resolution", mfc.resolution,
                    "grid spacing in (0,1]; default picks by support size");
  c_mfc->add_flag("--no-refine", mfc.no_refine, "skip the local polish step");
  c_mfc->add_option("--lattice", mfc.lattice, "also dump the full objective grid (K <= 2)");

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "finite-N queue ensembles on a time grid");
  c_sim->add_option("scenario", sim.scenario, "stationary scenario file")->required();
  c_sim->add_option("--out", sim.out, "output CSV path")->required();
  c_sim->add_option("--policy", sim.policy,
                    "comma-separated probabilities or a solver summary path")
      ->required();
  c_sim->add_option("-N,--n-users", sim.n_list, "user counts")
      ->delimiter(',')
      ->capture_default_str();
  c_sim->add_option("--trajectories", sim.trajectories, "runs per N")->capture_default_str();
  c_sim->add_option("--horizon", sim.horizon, "simulated seconds; default 40/lambda");
  c_sim->add_option("--grid-points", sim.grid_points, "sample times per run")
      ->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  c_sim->add_option("--threads", sim.threads, "worker threads")->capture_default_str();
  c_sim->add_option("--event-log", sim.event_log,
                    "dump the first trajectory's events (single -N only)");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("finite-eval",
                                  "Monte Carlo exploitability / planner-gap estimates");
  c_ev->add_option("scenario", ev.scenario, "one-shot scenario file")->required();
  c_ev->add_option("--out", ev.out, "output CSV path")->required();
  c_ev->add_option("--policy", ev.policy,
                   "comma-separated probabilities or a solver summary path")
      ->required();
  c_ev->add_option("-N,--n-users", ev.n_list, "user counts")
      ->delimiter(',')
      ->capture_default_str();
  c_ev->add_option("--mode", ev.mode, "estimator")
      ->check(CLI::IsMember({"exploitability", "coop-deviation"}))
      ->capture_default_str();
  c_ev->add_option("--samples", ev.samples,
                   "Monte Carlo samples per N; default 100000 / 20000 by mode");
  c_ev->add_option("--seed", ev.seed, "master seed")->capture_default_str();
  c_ev->add_option("--threads", ev.threads, "worker threads")->capture_default_str();

  std::string rerun_manifest;
  int rerun_threads = 0;
  auto* c_rr = app.add_subcommand("rerun", "repeat a recorded run from its manifest");
  c_rr->add_option("manifest", rerun_manifest, "manifest JSON path")->required();
  c_rr->add_option("--threads", rerun_threads, "override the recorded thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::vector<std::string> tail;
  for (int i = 1; i < argc; ++i) tail.emplace_back(argv[i]);

  try {
    if (*c_mfg) return run_solve_mfg(mfg, tail);
    if (*c_mfc) return run_solve_mfc(mfc, tail);
    if (*c_sim) return run_simulate(sim, tail);
    if (*c_ev) return run_finite_eval(ev, tail);
    if (*c_rr) return run_rerun(rerun_manifest, rerun_threads);
  } catch (const FeasibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegeneratePolicyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int run_args(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("offload");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> ptrs;
  ptrs.reserve(full.size());
  for (const auto& s : full) ptrs.push_back(s.c_str());
  return run(static_cast<int>(ptrs.size()), ptrs.data());
}

}  // namespace offload::cli

#endif  // OFFLOAD_CLI_HPP
