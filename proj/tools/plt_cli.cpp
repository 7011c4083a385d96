// plt: command-line front end for the curve, single runs and the benchmark.
//
//   plt curve --dim 2 --depth 3 --x 0.3
//   plt solve --seed 7 --method plt --p 4
//   plt bench --seeds 1..100 --methods ia,pia,ialt,plt --p 1,2,3,4 --format table
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plt/bench.hpp"
#include "plt/curve.hpp"
#include "plt/objective.hpp"
#include "plt/solver.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "a..b" or a single seed.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw plt::ConfigError("bad seed range '" + s + "' (expected A..B)");
  }
}

struct CommonOptions {
  double r = 2.9;
  double eps = 1e-3;
  double xi = 1e-6;
  int depth = 12;
  double delay_ms = 0.0;
  std::string form = "proof_form";
  std::string goal = "max";
  std::string points = "0.2,0.4,0.6,0.9";
  std::string stop_order = "evaluate-then-check";
  int oracle_resolution = 1000;
  double success_tol = 0.01;
  std::string cache_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--r", o.r, "reliability parameter (> 1)");
  cmd->add_option("--eps", o.eps, "search accuracy");
  cmd->add_option("--xi", o.xi, "lower bound on Hoelder estimates");
  cmd->add_option("--depth", o.depth, "curve approximation depth");
  cmd->add_option("--delay-ms", o.delay_ms, "artificial delay per evaluation (ms)");
  cmd->add_option("--form", o.form, "characteristic form: proof_form | step3");
  cmd->add_option("--goal", o.goal, "Grishagin goal: max (largest modulus) | min");
  cmd->add_option("--internal-points", o.points, "comma-separated initial points in (0,1)");
  cmd->add_option("--stop-order", o.stop_order,
                  "evaluate-then-check | check-then-evaluate");
  cmd->add_option("--oracle-resolution", o.oracle_resolution, "grid points per axis");
  cmd->add_option("--success-tol", o.success_tol, "success tolerance");
  cmd->add_option("--cache-dir", o.cache_dir, "oracle fixture directory");
}

std::vector<double> parse_points(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(std::stod(item));
  return out;
}

plt::StopOrder parse_stop_order(const std::string& s) {
  if (s == "evaluate-then-check") return plt::StopOrder::EvaluateThenCheck;
  if (s == "check-then-evaluate") return plt::StopOrder::CheckThenEvaluate;
  throw plt::ConfigError("unknown stop order '" + s + "'");
}

std::chrono::nanoseconds to_delay(double ms) {
  if (ms < 0) throw plt::ConfigError("delay must be >= 0");
  return std::chrono::nanoseconds(static_cast<std::int64_t>(ms * 1e6));
}

int run_curve(int dim, int depth, double x) {
  const auto spec = plt::CurveSpec::unit(dim, depth);
  const auto k = plt::cell_of(x, spec);
  const auto y = plt::map_to_domain(x, spec);
  std::cout << k.value << '\n' << std::setprecision(17);
  for (double v : y) std::cout << v << '\n';
  return 0;
}

int run_solve(std::uint64_t seed, const std::string& method, int p, int workers,
              const CommonOptions& o) {
  plt::MethodConfig cfg;
  cfg.variant = plt::parse_variant(method);
  cfg.p = p;
  cfg.r = o.r;
  cfg.xi = o.xi;
  cfg.epsilon = o.eps;
  cfg.initial_internal_points = parse_points(o.points);
  cfg.characteristic_form = plt::parse_characteristic_form(o.form);
  cfg.stop_order = parse_stop_order(o.stop_order);
  const auto goal = plt::parse_grishagin_goal(o.goal);
  const auto fn = plt::generate_grishagin(seed);
  plt::Objective obj = plt::make_grishagin_objective(fn, o.depth, goal, to_delay(o.delay_ms));
  cfg.validate(obj.domain());

  auto res = plt::solve_with_state(obj, cfg, plt::BatchExecutor(workers > 0 ? workers : p));
  const auto oracle = plt::load_or_compute_oracle(fn, goal, o.oracle_resolution, o.cache_dir);
  res.report.seed = seed;
  res.report.success =
      plt::is_success(res.state.trials, res.report.best_value, oracle, o.success_tol);
  std::cout << nlohmann::json(res.report).dump(2) << '\n';
  return 0;
}

int run_bench_cmd(const std::string& seeds, const std::string& methods, const std::string& ps,
                  int workers, int jobs, const std::string& out_path, const std::string& format,
                  bool keep_runs, const CommonOptions& o) {
  plt::BenchConfig cfg;
  std::tie(cfg.first_seed, cfg.last_seed) = parse_seed_range(seeds);
  cfg.methods.clear();
  for (const auto& m : split(methods, ',')) cfg.methods.push_back(plt::parse_variant(m));
  cfg.p_values.clear();
  for (const auto& p : split(ps, ',')) cfg.p_values.push_back(std::stoi(p));
  cfg.r = o.r;
  cfg.epsilon = o.eps;
  cfg.xi = o.xi;
  cfg.depth = o.depth;
  cfg.artificial_delay = to_delay(o.delay_ms);
  cfg.characteristic_form = plt::parse_characteristic_form(o.form);
  cfg.goal = plt::parse_grishagin_goal(o.goal);
  cfg.initial_internal_points = parse_points(o.points);
  cfg.stop_order = parse_stop_order(o.stop_order);
  cfg.oracle_resolution = o.oracle_resolution;
  cfg.success_tolerance = o.success_tol;
  cfg.cache_dir = o.cache_dir;
  cfg.workers = workers;
  cfg.jobs = jobs;
  cfg.keep_runs = keep_runs;
  const auto fmt = plt::parse_report_format(format);
  plt::validate(cfg);

  const auto report = plt::run_bench(cfg);
  const auto text = plt::emit_report(report, fmt);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
    if (fmt != plt::ReportFormat::Table) {
      std::cout << plt::emit_report(report, plt::ReportFormat::Table);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel information global search with local tuning"};
  app.require_subcommand(1);

  auto* curve = app.add_subcommand("curve", "map a curve parameter to its cell and point");
  int c_dim = 2;
  int c_depth = 12;
  double c_x = 0.0;
  curve->add_option("--dim", c_dim, "dimension")->required();
  curve->add_option("--depth", c_depth, "approximation depth")->required();
  curve->add_option("--x", c_x, "curve parameter in [0,1]")->required();

  auto* solve = app.add_subcommand("solve", "single run on one Grishagin function; JSON to stdout");
  std::uint64_t s_seed = 1;
  std::string s_method = "plt";
  int s_p = 1;
  int s_workers = 0;
  CommonOptions s_opts;
  solve->add_option("--seed", s_seed, "function seed")->required();
  solve->add_option("--method", s_method, "ia | pia | ialt | plt");
  solve->add_option("--p", s_p, "trials per iteration");
  solve->add_option("--workers", s_workers, "evaluation threads (default: p)");
  add_common(solve, s_opts);

  auto* bench = app.add_subcommand("bench", "benchmark over a seed range");
  std::string b_seeds = "1..100";
  std::string b_methods = "ia,pia,ialt,plt";
  std::string b_p = "1,2,3,4";
  int b_workers = 0;
  int b_jobs = 1;
  std::string b_out;
  std::string b_format = "table";
  bool b_no_runs = false;
  CommonOptions b_opts;
  bench->add_option("--seeds", b_seeds, "seed range A..B");
  bench->add_option("--methods", b_methods, "comma-separated methods");
  bench->add_option("--p", b_p, "comma-separated processor counts");
  bench->add_option("--workers", b_workers, "evaluation threads per run (default: p)");
  bench->add_option("--jobs", b_jobs, "seeds run concurrently");
  bench->add_option("--out", b_out, "output file (default: stdout)");
  bench->add_option("--format", b_format, "csv | json | table");
  bench->add_flag("--no-runs", b_no_runs, "omit per-run records from JSON output");
  add_common(bench, b_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*curve) return run_curve(c_dim, c_depth, c_x);
    if (*solve) return run_solve(s_seed, s_method, s_p, s_workers, s_opts);
    if (*bench) {
      return run_bench_cmd(b_seeds, b_methods, b_p, b_workers, b_jobs, b_out, b_format, !b_no_runs,
                           b_opts);
    }
  } catch (const std::logic_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
