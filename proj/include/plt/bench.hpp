// Benchmark harness: the four methods over a seeded family of Grishagin functions.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "plt/executor.hpp"
#include "plt/objective.hpp"
#include "plt/solver.hpp"

namespace plt {

struct BenchConfig {
  std::uint64_t first_seed = 1;
  std::uint64_t last_seed = 100;
  std::vector<Variant> methods{Variant::IA, Variant::PIA, Variant::IALT, Variant::PLT};
  std::vector<int> p_values{1, 2, 3, 4};
  double r = 2.9;
  double xi = 1e-6;
  double epsilon = 1e-3;
  int depth = 12;
  std::vector<double> initial_internal_points{0.2, 0.4, 0.6, 0.9};
  int oracle_resolution = 1000;
  double success_tolerance = 0.01;
  std::chrono::nanoseconds artificial_delay{0};
  CharacteristicForm characteristic_form = CharacteristicForm::ProofForm;
  StopOrder stop_order = StopOrder::EvaluateThenCheck;
  GrishaginGoal goal = GrishaginGoal::MaxModulus;
  int workers = 0;  ///< evaluation threads per run; 0 means one per trial in the batch (= p)
  int jobs = 1;     ///< seeds processed concurrently
  std::string cache_dir;  ///< oracle fixture directory; empty disables caching
  bool keep_runs = true;
};

struct BenchRow {
  Variant variant = Variant::PLT;
  int p = 1;
  std::uint64_t runs = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;  ///< runs aborted by an error
  double success_percent = 0.0;
  std::uint64_t total_trials = 0;
  double avg_trials = 0.0;
  double avg_iterations = 0.0;
  double avg_time = 0.0;  ///< seconds
  /// Against the sequential baseline of the same family (IA for PIA, IALT for PLT):
  /// ratio of average iteration counts, and of average times.
  std::optional<double> speedup_trials;
  std::optional<double> speedup_time;
  /// Local-tuning row against the global-estimate row with the same p
  /// (IALT vs IA, PLT vs PIA): ratio of average trials, and of average times.
  std::optional<double> vs_global_trials;
  std::optional<double> vs_global_time;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchReport {
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 0;
  double r = 0.0;
  double xi = 0.0;
  double epsilon = 0.0;
  int depth = 0;
  int oracle_resolution = 0;
  double success_tolerance = 0.0;
  double delay_ms = 0.0;
  CharacteristicForm characteristic_form = CharacteristicForm::ProofForm;
  GrishaginGoal goal = GrishaginGoal::MaxModulus;
  std::vector<BenchRow> rows;
  std::vector<RunReport> runs;

  const BenchRow* find(Variant v, int p) const {
    for (const auto& row : rows) {
      if (row.variant == v && row.p == p) return &row;
    }
    return nullptr;
  }

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Grid oracle specialised to the Grishagin class: trigonometric terms are
/// tabulated once per axis. Produces the same grid and values as
/// grid_oracle() on make_grishagin_objective().
inline OracleResult grishagin_grid_oracle(const GrishaginFunction& fn, GrishaginGoal goal,
                                          int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid_oracle: resolution must be >= 2");
  const double sign = goal == GrishaginGoal::MaxModulus ? -1.0 : 1.0;
  const auto res = static_cast<std::size_t>(resolution);
  std::vector<double> axis(res);
  for (std::size_t k = 0; k < res; ++k) {
    axis[k] = k == res - 1 ? 1.0 : 0.0 + (1.0 - 0.0) * static_cast<double>(k) / (resolution - 1);
  }
  std::vector<std::array<double, kGrishaginOrder>> sn(res), cs(res);
  for (std::size_t k = 0; k < res; ++k) {
    for (int i = 0; i < kGrishaginOrder; ++i) {
      const double w = std::numbers::pi * (i + 1);
      sn[k][i] = std::sin(w * axis[k]);
      cs[k][i] = std::cos(w * axis[k]);
    }
  }
  OracleResult best;
  best.resolution = resolution;
  best.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < res; ++u) {
    for (std::size_t v = 0; v < res; ++v) {
      double sum1 = 0.0;
      double sum2 = 0.0;
      for (int i = 0; i < kGrishaginOrder; ++i) {
        for (int j = 0; j < kGrishaginOrder; ++j) {
          const double aij = sn[u][i] * sn[v][j];
          const double bij = cs[u][i] * cs[v][j];
          sum1 += fn.a[i][j] * aij + fn.b[i][j] * bij;
          sum2 += fn.c[i][j] * aij - fn.d[i][j] * bij;
        }
      }
      const double val = sign * std::sqrt(sum1 * sum1 + sum2 * sum2);
      if (val < best.min_value) {
        best.min_value = val;
        best.minimizer = {axis[u], axis[v]};
      }
    }
  }
  return best;
}

inline std::filesystem::path function_fixture_path(const std::filesystem::path& dir,
                                                   std::uint64_t seed) {
  return dir / ("grishagin_" + std::to_string(seed) + ".json");
}

inline std::filesystem::path oracle_fixture_path(const std::filesystem::path& dir,
                                                 std::uint64_t seed, GrishaginGoal goal,
                                                 int resolution) {
  return dir / ("oracle_" + std::string(to_string(goal)) + "_" + std::to_string(seed) + "_" +
                std::to_string(resolution) + ".json");
}

namespace detail {

inline std::optional<nlohmann::json> read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  const auto tmp = path.string() + ".tmp." +
                   std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Oracle for `fn`, read from the fixture directory when a matching entry exists,
/// otherwise computed and written there. An empty directory disables caching.
inline OracleResult load_or_compute_oracle(const GrishaginFunction& fn, GrishaginGoal goal,
                                           int resolution, const std::string& cache_dir) {
  if (cache_dir.empty()) return grishagin_grid_oracle(fn, goal, resolution);
  const std::filesystem::path dir(cache_dir);
  std::filesystem::create_directories(dir);
  const auto fn_path = function_fixture_path(dir, fn.seed);
  const auto or_path = oracle_fixture_path(dir, fn.seed, goal, resolution);

  bool fn_matches = false;
  if (const auto stored_fn = detail::read_json_file(fn_path)) {
    try {
      fn_matches = stored_fn->get<GrishaginFunction>() == fn;
    } catch (const nlohmann::json::exception&) {
    }
  }
  if (fn_matches) {
    if (const auto stored = detail::read_json_file(or_path)) {
      try {
        auto r = stored->get<OracleResult>();
        if (r.resolution == resolution) return r;
      } catch (const nlohmann::json::exception&) {
      }
    }
  } else {
    detail::write_json_file(fn_path, nlohmann::json(fn));
  }
  OracleResult r = grishagin_grid_oracle(fn, goal, resolution);
  nlohmann::json j = r;
  j["seed"] = fn.seed;
  j["goal"] = std::string(to_string(goal));
  detail::write_json_file(or_path, j);
  return r;
}

/// A run succeeds if a trial lies within `tol` (max-norm) of the oracle minimiser
/// or the best value found is within `tol` of the oracle minimum.
inline bool is_success(std::span<const Trial> trials, double best_value, const OracleResult& oracle,
                       double tol) {
  if (best_value <= oracle.min_value + tol) return true;
  for (const Trial& t : trials) {
    double dist = 0.0;
    for (std::size_t i = 0; i < t.y.size(); ++i) {
      dist = std::max(dist, std::abs(t.y[i] - oracle.minimizer[i]));
    }
    if (dist <= tol) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Benchmark run
// ---------------------------------------------------------------------------

/// (method, p) combinations of a configuration: sequential methods at p = 1,
/// parallel ones at every requested p.
inline std::vector<std::pair<Variant, int>> bench_cells(const BenchConfig& cfg) {
  std::vector<std::pair<Variant, int>> cells;
  for (Variant v : cfg.methods) {
    if (!is_parallel(v)) {
      cells.emplace_back(v, 1);
      continue;
    }
    auto ps = cfg.p_values;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    for (int p : ps) cells.emplace_back(v, p);
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

inline MethodConfig method_config(const BenchConfig& cfg, Variant v, int p) {
  MethodConfig m;
  m.variant = v;
  m.p = p;
  m.r = cfg.r;
  m.xi = cfg.xi;
  m.epsilon = cfg.epsilon;
  m.initial_internal_points = cfg.initial_internal_points;
  m.characteristic_form = cfg.characteristic_form;
  m.stop_order = cfg.stop_order;
  return m;
}

inline void validate(const BenchConfig& cfg) {
  if (cfg.last_seed < cfg.first_seed) throw ConfigError("empty seed range");
  if (cfg.oracle_resolution < 2) throw ConfigError("oracle resolution must be >= 2");
  if (!(cfg.success_tolerance > 0.0)) throw ConfigError("success tolerance must be > 0");
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  const auto curve = CurveSpec::unit(2, cfg.depth);
  for (auto [v, p] : bench_cells(cfg)) method_config(cfg, v, p).validate(curve);
}

/// Fills the speed-up columns of `rows` from the averages already in place.
inline void fill_speedups(std::vector<BenchRow>& rows) {
  auto find = [&rows](Variant v, int p) -> const BenchRow* {
    for (const auto& r : rows) {
      if (r.variant == v && r.p == p) return &r;
    }
    return nullptr;
  };
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (!(den > 0.0) || !(num > 0.0)) return std::nullopt;
    return num / den;
  };
  for (auto& row : rows) {
    row.speedup_trials.reset();
    row.speedup_time.reset();
    row.vs_global_trials.reset();
    row.vs_global_time.reset();
    if (is_parallel(row.variant)) {
      const Variant seq = row.variant == Variant::PLT ? Variant::IALT : Variant::IA;
      const BenchRow* base = find(seq, 1);
      if (base == nullptr) base = find(row.variant, 1);
      if (base != nullptr) {
        row.speedup_trials = ratio(base->avg_iterations, row.avg_iterations);
        row.speedup_time = ratio(base->avg_time, row.avg_time);
      }
    }
    if (uses_local_tuning(row.variant)) {
      const Variant global = row.variant == Variant::PLT ? Variant::PIA : Variant::IA;
      const BenchRow* other = find(global, row.p);
      if (other == nullptr && row.p == 1) {
        other = find(row.variant == Variant::PLT ? Variant::IA : Variant::PIA, 1);
      }
      if (other != nullptr) {
        row.vs_global_trials = ratio(other->avg_trials, row.avg_trials);
        row.vs_global_time = ratio(other->avg_time, row.avg_time);
      }
    }
  }
}

inline BenchReport run_bench(const BenchConfig& cfg) {
  validate(cfg);
  const auto cells = bench_cells(cfg);
  const std::uint64_t seed_count = cfg.last_seed - cfg.first_seed + 1;

  // runs[s][c]: report of cell c on the s-th seed.
  std::vector<std::vector<RunReport>> runs(seed_count, std::vector<RunReport>(cells.size()));
  std::vector<std::vector<bool>> aborted(seed_count, std::vector<bool>(cells.size(), false));
  std::vector<std::exception_ptr> fatal(seed_count);

  auto run_seed = [&](std::uint64_t s) {
    const std::uint64_t seed = cfg.first_seed + s;
    const GrishaginFunction fn = generate_grishagin(seed);
    const OracleResult oracle =
        load_or_compute_oracle(fn, cfg.goal, cfg.oracle_resolution, cfg.cache_dir);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto [variant, p] = cells[c];
      const MethodConfig mc = method_config(cfg, variant, p);
      Objective obj = make_grishagin_objective(fn, cfg.depth, cfg.goal, cfg.artificial_delay);
      const BatchExecutor exec(cfg.workers == 0 ? p : cfg.workers);
      RunReport& rep = runs[s][c];
      try {
        auto res = solve_with_state(obj, mc, exec);
        rep = std::move(res.report);
        rep.success = is_success(res.state.trials, rep.best_value, oracle, cfg.success_tolerance);
        if (rep.trials != obj.eval_count()) {
          throw std::logic_error("trial accounting mismatch for seed " + std::to_string(seed));
        }
      } catch (const std::logic_error&) {
        throw;
      } catch (const std::exception&) {
        rep = RunReport{};
        rep.variant = variant;
        rep.p = p;
        rep.r = mc.r;
        rep.xi = mc.xi;
        rep.epsilon = mc.epsilon;
        rep.depth = cfg.depth;
        rep.characteristic_form = mc.characteristic_form;
        rep.trials = obj.eval_count();
        rep.success = false;
        aborted[s][c] = true;
      }
      rep.seed = seed;
    }
  };

  const auto jobs = static_cast<std::uint64_t>(std::max(1, cfg.jobs));
  if (jobs == 1 || seed_count == 1) {
    for (std::uint64_t s = 0; s < seed_count; ++s) run_seed(s);
  } else {
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      for (std::uint64_t s = next.fetch_add(1); s < seed_count; s = next.fetch_add(1)) {
        try {
          run_seed(s);
        } catch (...) {
          fatal[s] = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (std::uint64_t j = 0; j < std::min(jobs, seed_count); ++j) pool.emplace_back(worker);
  }
  for (const auto& e : fatal) {
    if (e) std::rethrow_exception(e);
  }

  BenchReport rep;
  rep.first_seed = cfg.first_seed;
  rep.last_seed = cfg.last_seed;
  rep.r = cfg.r;
  rep.xi = cfg.xi;
  rep.epsilon = cfg.epsilon;
  rep.depth = cfg.depth;
  rep.oracle_resolution = cfg.oracle_resolution;
  rep.success_tolerance = cfg.success_tolerance;
  rep.delay_ms = std::chrono::duration<double, std::milli>(cfg.artificial_delay).count();
  rep.characteristic_form = cfg.characteristic_form;
  rep.goal = cfg.goal;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    BenchRow row;
    row.variant = cells[c].first;
    row.p = cells[c].second;
    std::uint64_t iterations = 0;
    double millis = 0.0;
    for (std::uint64_t s = 0; s < seed_count; ++s) {
      const RunReport& r = runs[s][c];
      ++row.runs;
      row.total_trials += r.trials;
      iterations += r.iterations;
      millis += r.wall_millis;
      if (aborted[s][c]) ++row.failures;
      if (r.success.value_or(false)) ++row.successes;
    }
    const auto n = static_cast<double>(row.runs);
    row.success_percent = 100.0 * static_cast<double>(row.successes) / n;
    row.avg_trials = static_cast<double>(row.total_trials) / n;
    row.avg_iterations = static_cast<double>(iterations) / n;
    row.avg_time = millis / 1000.0 / n;
    rep.rows.push_back(row);
  }
  fill_speedups(rep.rows);

  if (cfg.keep_runs) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (std::uint64_t s = 0; s < seed_count; ++s) rep.runs.push_back(runs[s][c]);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization and rendering
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const BenchRow& row) {
  j = nlohmann::json{{"method", to_string(row.variant)},
                     {"processors", row.p},
                     {"runs", row.runs},
                     {"successes", row.successes},
                     {"failures", row.failures},
                     {"success_percent", row.success_percent},
                     {"total_trials", row.total_trials},
                     {"avg_trials", row.avg_trials},
                     {"avg_iterations", row.avg_iterations},
                     {"avg_time", row.avg_time},
                     {"speedup_trials", detail::opt_json(row.speedup_trials)},
                     {"speedup_time", detail::opt_json(row.speedup_time)},
                     {"vs_global_trials", detail::opt_json(row.vs_global_trials)},
                     {"vs_global_time", detail::opt_json(row.vs_global_time)}};
}

inline void from_json(const nlohmann::json& j, BenchRow& row) {
  row.variant = parse_variant(j.at("method").get<std::string>());
  j.at("processors").get_to(row.p);
  j.at("runs").get_to(row.runs);
  j.at("successes").get_to(row.successes);
  j.at("failures").get_to(row.failures);
  j.at("success_percent").get_to(row.success_percent);
  j.at("total_trials").get_to(row.total_trials);
  j.at("avg_trials").get_to(row.avg_trials);
  j.at("avg_iterations").get_to(row.avg_iterations);
  j.at("avg_time").get_to(row.avg_time);
  row.speedup_trials = detail::opt_from(j.at("speedup_trials"));
  row.speedup_time = detail::opt_from(j.at("speedup_time"));
  row.vs_global_trials = detail::opt_from(j.at("vs_global_trials"));
  row.vs_global_time = detail::opt_from(j.at("vs_global_time"));
}

inline void to_json(nlohmann::json& j, const BenchReport& rep) {
  j = nlohmann::json{{"seeds", {rep.first_seed, rep.last_seed}},
                     {"r", rep.r},
                     {"xi", rep.xi},
                     {"epsilon", rep.epsilon},
                     {"depth", rep.depth},
                     {"oracle_resolution", rep.oracle_resolution},
                     {"success_tolerance", rep.success_tolerance},
                     {"delay_ms", rep.delay_ms},
                     {"characteristic_form", to_string(rep.characteristic_form)},
                     {"goal", to_string(rep.goal)},
                     {"trials_include_initial", true},
                     {"rows", rep.rows},
                     {"runs", rep.runs}};
}

inline void from_json(const nlohmann::json& j, BenchReport& rep) {
  const auto& seeds = j.at("seeds");
  seeds.at(0).get_to(rep.first_seed);
  seeds.at(1).get_to(rep.last_seed);
  j.at("r").get_to(rep.r);
  j.at("xi").get_to(rep.xi);
  j.at("epsilon").get_to(rep.epsilon);
  j.at("depth").get_to(rep.depth);
  j.at("oracle_resolution").get_to(rep.oracle_resolution);
  j.at("success_tolerance").get_to(rep.success_tolerance);
  j.at("delay_ms").get_to(rep.delay_ms);
  rep.characteristic_form = parse_characteristic_form(j.at("characteristic_form").get<std::string>());
  rep.goal = parse_grishagin_goal(j.at("goal").get<std::string>());
  j.at("rows").get_to(rep.rows);
  j.at("runs").get_to(rep.runs);
}

enum class ReportFormat { Csv, Json, Table };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "table") return ReportFormat::Table;
  throw std::invalid_argument("unknown format '" + std::string(s) + "'");
}

inline std::string emit_report(const BenchReport& rep, ReportFormat format) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v, int prec) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << *v;
    return s.str();
  };

  switch (format) {
    case ReportFormat::Json:
      out << nlohmann::json(rep).dump(2) << '\n';
      break;

    case ReportFormat::Csv: {
      out << "method,processors,success_percent,trials,time_s,speedup_trials,speedup_time,"
             "vs_global_trials,vs_global_time,runs,failures\n";
      auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string();
        std::ostringstream s;
        s << std::setprecision(17) << *v;
        return s.str();
      };
      out << std::setprecision(17);
      for (const auto& row : rep.rows) {
        out << to_string(row.variant) << ',' << row.p << ',' << row.success_percent << ','
            << row.avg_trials << ',' << row.avg_time << ',' << cell(row.speedup_trials) << ','
            << cell(row.speedup_time) << ',' << cell(row.vs_global_trials) << ','
            << cell(row.vs_global_time) << ',' << row.runs << ',' << row.failures << '\n';
      }
      break;
    }

    case ReportFormat::Table: {
      out << "Seeds " << rep.first_seed << ".." << rep.last_seed << ", r = " << rep.r
          << ", eps = " << rep.epsilon << ", xi = " << rep.xi << ", depth = " << rep.depth
          << ", characteristic = " << to_string(rep.characteristic_form)
          << ", goal = " << to_string(rep.goal) << " modulus\n"
          << "Trials include the initial evaluations; time in seconds per run.\n\n";
      out << std::left << std::setw(8) << "Method" << std::right << std::setw(11) << "Processors"
          << std::setw(8) << "%" << std::setw(11) << "Trials" << std::setw(10) << "Time"
          << std::setw(18) << "Speed up(trials)" << std::setw(16) << "Speed up(time)" << '\n';
      for (const auto& row : rep.rows) {
        out << std::left << std::setw(8) << to_string(row.variant) << std::right << std::setw(11)
            << row.p << std::setw(8) << std::fixed << std::setprecision(0) << row.success_percent
            << std::setw(11) << std::setprecision(2) << row.avg_trials << std::setw(10)
            << std::setprecision(4) << row.avg_time << std::setw(18)
            << opt(row.speedup_trials, 2) << std::setw(16) << opt(row.speedup_time, 2) << '\n';
      }
      bool header = false;
      for (const auto& row : rep.rows) {
        if (!row.vs_global_trials) continue;
        if (!header) {
          out << "\nLocal tuning vs global estimate (same processors)\n"
              << std::left << std::setw(8) << "Method" << std::right << std::setw(11)
              << "Processors" << std::setw(20) << "Speed up in trials" << std::setw(18)
              << "Speed up in time" << '\n';
          header = true;
        }
        out << std::left << std::setw(8) << to_string(row.variant) << std::right << std::setw(11)
            << row.p << std::setw(20) << opt(row.vs_global_trials, 2) << std::setw(18)
            << opt(row.vs_global_time, 2) << '\n';
      }
      break;
    }
  }
  return out.str();
}

inline BenchReport parse_report_json(const std::string& text) {
  return nlohmann::json::parse(text).get<BenchReport>();
}

}  // namespace plt
