// Information algorithms for Hoelder-continuous functions on [0,1].
//
// One state machine covers four variants:
//
//   IA    sequential, one adaptive global Hoelder estimate for all intervals
//   PIA   IA evaluating p trials per iteration
//   IALT  sequential, local tuning: a separate estimate mu_j per interval
//   PLT   IALT evaluating p trials per iteration
//
// Every iteration estimates mu_j, ranks intervals by characteristic R(j),
// places one trial in each of the p best intervals, evaluates them as one
// batch and stops once a selected interval is shorter than eps^N.
//
// Intervals are indexed from 0 here: interval i spans trials[i]..trials[i+1].
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "plt/curve.hpp"
#include "plt/executor.hpp"
#include "plt/objective.hpp"

namespace plt {

enum class Variant { IA, PIA, IALT, PLT };

/// Which constant multiplies (z_j + z_{j-1}) in the characteristic.
enum class CharacteristicForm {
  Step3,  ///< R = ... - (z_j + z_{j-1})
  ProofForm,   ///< R = ... - 2 (z_j + z_{j-1})
};

/// Order of the stopping check relative to evaluating the selected batch.
enum class StopOrder {
  EvaluateThenCheck,  ///< evaluate the batch, then test the intervals it was drawn from
  CheckThenEvaluate,  ///< test the selected intervals first; skip the batch when stopping
};

inline bool uses_local_tuning(Variant v) { return v == Variant::IALT || v == Variant::PLT; }
inline bool is_parallel(Variant v) { return v == Variant::PIA || v == Variant::PLT; }

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::IA: return "IA";
    case Variant::PIA: return "PIA";
    case Variant::IALT: return "IALT";
    case Variant::PLT: return "PLT";
  }
  return "?";
}

inline std::string_view to_string(CharacteristicForm f) {
  return f == CharacteristicForm::ProofForm ? "proof_form" : "step3";
}

inline Variant parse_variant(std::string_view s) {
  std::string up(s);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "IA") return Variant::IA;
  if (up == "PIA") return Variant::PIA;
  if (up == "IALT") return Variant::IALT;
  if (up == "PLT") return Variant::PLT;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline CharacteristicForm parse_characteristic_form(std::string_view s) {
  if (s == "proof_form" || s == "proof") return CharacteristicForm::ProofForm;
  if (s == "paper_step3" || s == "step3") return CharacteristicForm::Step3;
  throw std::invalid_argument("unknown characteristic form '" + std::string(s) + "'");
}

/// Raised for invalid method configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a run cannot continue (trial cap, exhausted floating-point resolution).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MethodConfig {
  Variant variant = Variant::PLT;
  double r = 2.9;
  double xi = 1e-6;
  double epsilon = 1e-3;
  int p = 1;
  std::vector<double> initial_internal_points{0.2, 0.4, 0.6, 0.9};
  CharacteristicForm characteristic_form = CharacteristicForm::ProofForm;
  StopOrder stop_order = StopOrder::EvaluateThenCheck;
  std::uint64_t max_trials = 1'000'000;
  bool record_trace = false;

  /// Throws ConfigError unless the configuration is usable with `curve`.
  void validate(const CurveSpec& curve) const {
    if (!(r > 1.0)) throw ConfigError("r must be > 1");
    if (!(xi > 0.0)) throw ConfigError("xi must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
    if (p < 1) throw ConfigError("p must be >= 1");
    if (!is_parallel(variant) && p != 1) {
      throw ConfigError(std::string(to_string(variant)) + " is sequential and requires p = 1");
    }
    const double finest = std::ldexp(1.0, -curve.depth()) / (4.0 * std::sqrt(curve.dim()));
    if (epsilon < finest) {
      throw ConfigError("epsilon " + std::to_string(epsilon) + " is finer than the curve allows (" +
                        std::to_string(finest) + " at depth " + std::to_string(curve.depth()) + ")");
    }
    if (initial_internal_points.empty()) throw ConfigError("need at least one internal point");
    double prev = 0.0;
    for (double x : initial_internal_points) {
      if (!(x > prev && x < 1.0)) {
        throw ConfigError("initial internal points must be strictly increasing inside (0,1)");
      }
      prev = x;
    }
    if (static_cast<std::size_t>(p) > initial_internal_points.size() + 1) {
      throw ConfigError("p exceeds the number of initial intervals");
    }
  }
};

struct SolverState {
  std::vector<Trial> trials;           ///< strictly increasing in x
  std::vector<double> mu;              ///< per-interval estimates used by the last iteration
  std::vector<double> characteristics; ///< R of the last iteration
  std::vector<std::size_t> selected;   ///< intervals chosen by the last iteration
  std::uint64_t iteration = 0;         ///< l; 1 after initialization
  Trial best;
  bool stopped = false;
  std::uint64_t escapes_clamped = 0;

  std::size_t interval_count() const { return trials.empty() ? 0 : trials.size() - 1; }
};

// ---------------------------------------------------------------------------
// Interval formulas
// ---------------------------------------------------------------------------

/// (dx)^{1/N}.
inline double holder_length(double dx, int dim) {
  if (dim == 1) return dx;
  if (dim == 2) return std::sqrt(dx);
  return std::pow(dx, 1.0 / dim);
}

/// |z_i - z_{i-1}| / (x_i - x_{i-1})^{1/N} for every interval.
inline std::vector<double> holder_quotients(std::span<const Trial> trials, int dim) {
  std::vector<double> q;
  if (trials.size() < 2) return q;
  q.reserve(trials.size() - 1);
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const double len = trials[i].x - trials[i - 1].x;
    if (!(len > 0.0)) throw std::logic_error("trials are not strictly ordered");
    q.push_back(std::abs(trials[i].z - trials[i - 1].z) / holder_length(len, dim));
  }
  return q;
}

/// Largest Hoelder quotient over all intervals (0 for a constant function).
inline double estimate_global_mu(std::span<const Trial> trials, int dim) {
  if (trials.size() < 2) throw std::invalid_argument("estimate_global_mu: need >= 2 trials");
  const auto q = holder_quotients(trials, dim);
  return *std::max_element(q.begin(), q.end());
}

/// Local tuning: mu_j = max{lambda_j, gamma_j, xi}.
///
/// lambda_j is the largest quotient among interval j and its immediate
/// neighbours; gamma_j = mu * (len_j / len_max)^{1/N} scales the global
/// estimate by the relative interval length.
inline std::vector<double> estimate_local_mu(std::span<const Trial> trials, int dim, double xi) {
  if (trials.size() < 2) throw std::invalid_argument("estimate_local_mu: need >= 2 trials");
  const auto q = holder_quotients(trials, dim);
  const std::size_t n = q.size();
  const double global = *std::max_element(q.begin(), q.end());
  double longest = 0.0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    longest = std::max(longest, trials[i].x - trials[i - 1].x);
  }

  std::vector<double> mu(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = std::min(j + 1, n - 1);
    double lambda = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) lambda = std::max(lambda, q[i]);
    const double len = trials[j + 1].x - trials[j].x;
    const double gamma = global * holder_length(len, dim) / holder_length(longest, dim);
    mu[j] = std::max({lambda, gamma, xi});
  }
  return mu;
}

/// max{mu, xi} repeated for every interval (IA / PIA).
inline std::vector<double> estimate_uniform_mu(std::span<const Trial> trials, int dim, double xi) {
  const double mu = std::max(estimate_global_mu(trials, dim), xi);
  return std::vector<double>(trials.size() - 1, mu);
}

inline std::vector<double> interval_estimates(std::span<const Trial> trials, int dim,
                                              Variant variant, double xi) {
  return uses_local_tuning(variant) ? estimate_local_mu(trials, dim, xi)
                                    : estimate_uniform_mu(trials, dim, xi);
}

inline std::vector<double> characteristics(std::span<const Trial> trials,
                                           std::span<const double> mu, double r, int dim,
                                           CharacteristicForm form) {
  if (trials.size() < 2 || mu.size() != trials.size() - 1) {
    throw std::invalid_argument("characteristics: mu must have one entry per interval");
  }
  const double c = form == CharacteristicForm::ProofForm ? 2.0 : 1.0;
  std::vector<double> out(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double len = trials[j + 1].x - trials[j].x;
    if (!(len > 0.0)) throw std::logic_error("characteristics: zero-length interval");
    if (!(mu[j] > 0.0)) throw std::invalid_argument("characteristics: mu must be positive");
    const double scaled = r * mu[j] * holder_length(len, dim);
    const double dz = trials[j + 1].z - trials[j].z;
    out[j] = scaled + dz * dz / scaled - c * (trials[j + 1].z + trials[j].z);
  }
  return out;
}

/// Indices of the p largest characteristics in decreasing order; ties go to the lower index.
inline std::vector<std::size_t> select_intervals(std::span<const double> rs, int p) {
  if (p < 1) throw ConfigError("select_intervals: p must be >= 1");
  if (static_cast<std::size_t>(p) > rs.size()) {
    throw ConfigError("select_intervals: p = " + std::to_string(p) + " exceeds " +
                      std::to_string(rs.size()) + " intervals");
  }
  std::vector<std::size_t> idx(rs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + p, idx.end(), [&](std::size_t a, std::size_t b) {
    return rs[a] > rs[b] || (rs[a] == rs[b] && a < b);
  });
  idx.resize(static_cast<std::size_t>(p));
  return idx;
}

struct NewPoint {
  double x = 0.0;
  bool clamped = false;
};

/// Trial point inside interval t:
///   x = (x_{t-1} + x_t)/2 - sign(dz) (|dz| / mu_t)^N / (2r).
/// A point that escapes the open interval is replaced by the midpoint.
inline NewPoint next_point(std::span<const Trial> trials, std::size_t t, double mu_t, double r,
                           int dim) {
  if (t + 1 >= trials.size()) throw std::out_of_range("next_point: interval index out of range");
  if (!(mu_t > 0.0)) throw std::invalid_argument("next_point: mu must be positive");
  const double left = trials[t].x;
  const double right = trials[t + 1].x;
  const double dz = trials[t + 1].z - trials[t].z;
  double shift = 1.0;
  for (int i = 0; i < dim; ++i) shift *= std::abs(dz) / mu_t;
  const double sign = dz > 0.0 ? 1.0 : (dz < 0.0 ? -1.0 : 0.0);
  const double mid = 0.5 * (left + right);
  const double x = mid - sign * shift / (2.0 * r);
  if (x > left && x < right) return {x, false};
  if (!(mid > left && mid < right)) {
    throw SolverError("interval [" + std::to_string(left) + ", " + std::to_string(right) +
                      "] cannot be split in double precision");
  }
  return {mid, true};
}

/// True iff some selected interval has (x_t - x_{t-1})^{1/N} <= eps.
inline bool should_stop(std::span<const Trial> trials, std::span<const std::size_t> selected,
                        double epsilon, int dim) {
  if (selected.empty()) throw std::invalid_argument("should_stop: no selected intervals");
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t t : selected) {
    shortest = std::min(shortest, holder_length(trials[t + 1].x - trials[t].x, dim));
  }
  return shortest <= epsilon;
}

// ---------------------------------------------------------------------------
// Convergence condition check
// ---------------------------------------------------------------------------

/// Evaluation of the sufficient condition
///   r mu_j >= 2^{1-1/N} K_j + sqrt(4^{1-1/N} K_j^2 - M_j^2)
/// on the interval containing a known global minimiser x*.
struct ConvergenceWitness {
  std::size_t interval_index = 0;
  double k = 0.0;
  double m = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  bool at_node = false;      ///< x* coincides with a trial point
  bool degenerate = false;   ///< the square-root argument was negative and was dropped
};

inline ConvergenceWitness convergence_witness(std::span<const Trial> trials,
                                              std::span<const double> mu, double x_star,
                                              double f_star, double r, int dim) {
  if (!(x_star >= 0.0 && x_star <= 1.0)) {
    throw std::domain_error("convergence_witness: x* outside [0,1]");
  }
  if (trials.size() < 2 || mu.size() != trials.size() - 1) {
    throw std::invalid_argument("convergence_witness: mu must have one entry per interval");
  }
  if (x_star < trials.front().x || x_star > trials.back().x) {
    throw std::domain_error("convergence_witness: no interval contains x*");
  }
  auto it = std::lower_bound(trials.begin(), trials.end(), x_star,
                             [](const Trial& t, double x) { return t.x < x; });
  ConvergenceWitness w;
  if (it != trials.end() && it->x == x_star) {
    const auto node = static_cast<std::size_t>(it - trials.begin());
    w.interval_index = node == 0 ? 0 : node - 1;
    w.at_node = true;
    w.satisfied = true;
    w.lhs = r * mu[w.interval_index];
    return w;
  }
  const auto j = static_cast<std::size_t>(it - trials.begin()) - 1;
  const Trial& a = trials[j];
  const Trial& b = trials[j + 1];
  w.interval_index = j;
  w.k = std::max((a.z - f_star) / holder_length(x_star - a.x, dim),
                 (b.z - f_star) / holder_length(b.x - x_star, dim));
  w.m = std::abs(a.z - b.z) / holder_length(b.x - a.x, dim);
  const double expo = 1.0 - 1.0 / dim;
  const double disc = std::pow(4.0, expo) * w.k * w.k - w.m * w.m;
  w.lhs = r * mu[j];
  w.rhs = std::pow(2.0, expo) * w.k;
  if (disc >= 0.0) {
    w.rhs += std::sqrt(disc);
  } else {
    w.degenerate = true;
  }
  w.satisfied = w.lhs >= w.rhs;
  return w;
}

// ---------------------------------------------------------------------------
// Iteration loop
// ---------------------------------------------------------------------------

template <class E>
concept TrialExecutor = requires(const E& e, const BatchRequest& req, Objective& obj) {
  { e.evaluate(req, obj) } -> std::same_as<BatchResult>;
};

/// Step 0: trials at 0, 1 and every configured internal point.
inline SolverState initialize(Objective& obj, const MethodConfig& cfg) {
  cfg.validate(obj.domain());
  SolverState st;
  st.trials.push_back(obj.reduced_eval(0.0));
  for (double x : cfg.initial_internal_points) st.trials.push_back(obj.reduced_eval(x));
  st.trials.push_back(obj.reduced_eval(1.0));
  st.best = st.trials.front();
  for (const Trial& t : st.trials) {
    if (t.z < st.best.z) st.best = t;
  }
  st.iteration = 1;
  return st;
}

/// One parallel iteration: estimate, rank, place p trials, evaluate, merge, test stopping.
template <TrialExecutor E>
void iterate(SolverState& st, Objective& obj, const MethodConfig& cfg, const E& exec) {
  if (st.stopped) throw std::logic_error("iterate: solver already stopped");
  const int dim = obj.domain().dim();

  st.mu = interval_estimates(st.trials, dim, cfg.variant, cfg.xi);
  st.characteristics = characteristics(st.trials, st.mu, cfg.r, dim, cfg.characteristic_form);
  st.selected = select_intervals(st.characteristics, cfg.p);

  const bool stop = should_stop(st.trials, st.selected, cfg.epsilon, dim);
  if (stop && cfg.stop_order == StopOrder::CheckThenEvaluate) {
    st.stopped = true;
    return;
  }

  BatchRequest req;
  req.iteration = st.iteration + 1;
  req.points.reserve(st.selected.size());
  for (std::size_t t : st.selected) {
    const NewPoint np = next_point(st.trials, t, st.mu[t], cfg.r, dim);
    if (np.clamped) ++st.escapes_clamped;
    req.points.push_back(np.x);
  }

  BatchResult res = exec.evaluate(req, obj);

  std::vector<Trial> merged;
  merged.reserve(st.trials.size() + res.trials.size());
  std::merge(std::make_move_iterator(st.trials.begin()), std::make_move_iterator(st.trials.end()),
             std::make_move_iterator(res.trials.begin()), std::make_move_iterator(res.trials.end()),
             std::back_inserter(merged), [](const Trial& a, const Trial& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < merged.size(); ++i) {
    if (!(merged[i].x > merged[i - 1].x)) {
      throw SolverError("new trial collides with an existing one at x = " +
                        std::to_string(merged[i].x));
    }
  }
  st.trials = std::move(merged);
  for (const Trial& t : st.trials) {
    if (t.z < st.best.z) st.best = t;
  }
  ++st.iteration;
  if (stop) st.stopped = true;
}

struct TraceEntry {
  std::uint64_t iteration = 0;
  std::uint64_t trials = 0;
  double best_value = 0.0;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RunReport {
  Variant variant = Variant::PLT;
  std::optional<std::uint64_t> seed;
  double r = 0.0;
  double xi = 0.0;
  double epsilon = 0.0;
  int p = 1;
  int depth = 0;
  CharacteristicForm characteristic_form = CharacteristicForm::ProofForm;
  std::uint64_t trials = 0;      ///< all evaluations, initial ones included
  std::uint64_t iterations = 0;  ///< parallel iterations after initialization
  double best_value = 0.0;
  double best_x = 0.0;
  std::vector<double> best_point;
  std::optional<bool> success;
  double wall_millis = 0.0;
  std::uint64_t escapes_clamped = 0;
  std::vector<TraceEntry> trace;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct SolveResult {
  SolverState state;
  RunReport report;
};

/// Runs iterate() until the stopping rule fires; keeps the final state.
template <TrialExecutor E>
SolveResult solve_with_state(Objective& obj, const MethodConfig& cfg, const E& exec) {
  const auto start = std::chrono::steady_clock::now();
  SolveResult out;
  SolverState& st = out.state;
  RunReport& rep = out.report;
  st = initialize(obj, cfg);
  if (cfg.record_trace) rep.trace.push_back({st.iteration, st.trials.size(), st.best.z});
  while (!st.stopped) {
    if (st.trials.size() >= cfg.max_trials) {
      throw SolverError("trial cap of " + std::to_string(cfg.max_trials) +
                        " reached without meeting the stopping rule (best z = " +
                        std::to_string(st.best.z) + ")");
    }
    iterate(st, obj, cfg, exec);
    if (cfg.record_trace) rep.trace.push_back({st.iteration, st.trials.size(), st.best.z});
  }
  rep.variant = cfg.variant;
  rep.r = cfg.r;
  rep.xi = cfg.xi;
  rep.epsilon = cfg.epsilon;
  rep.p = cfg.p;
  rep.depth = obj.domain().depth();
  rep.characteristic_form = cfg.characteristic_form;
  rep.trials = st.trials.size();
  rep.iterations = st.iteration - 1;
  rep.best_value = st.best.z;
  rep.best_x = st.best.x;
  rep.best_point = st.best.y;
  rep.escapes_clamped = st.escapes_clamped;
  rep.wall_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

template <TrialExecutor E>
RunReport solve(Objective& obj, const MethodConfig& cfg, const E& exec) {
  return solve_with_state(obj, cfg, exec).report;
}

inline RunReport solve(Objective& obj, const MethodConfig& cfg) {
  return solve(obj, cfg, BatchExecutor{1});
}

inline void to_json(nlohmann::json& j, const TraceEntry& t) {
  j = nlohmann::json{{"iteration", t.iteration}, {"trials", t.trials}, {"best_value", t.best_value}};
}

inline void from_json(const nlohmann::json& j, TraceEntry& t) {
  j.at("iteration").get_to(t.iteration);
  j.at("trials").get_to(t.trials);
  j.at("best_value").get_to(t.best_value);
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
  j = nlohmann::json{{"variant", to_string(r.variant)},
                     {"seed", r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr)},
                     {"r", r.r},
                     {"xi", r.xi},
                     {"epsilon", r.epsilon},
                     {"p", r.p},
                     {"depth", r.depth},
                     {"characteristic_form", to_string(r.characteristic_form)},
                     {"trials", r.trials},
                     {"iterations", r.iterations},
                     {"best_value", r.best_value},
                     {"best_x", r.best_x},
                     {"best_point", r.best_point},
                     {"success", r.success ? nlohmann::json(*r.success) : nlohmann::json(nullptr)},
                     {"wall_millis", r.wall_millis},
                     {"escapes_clamped", r.escapes_clamped}};
  if (!r.trace.empty()) j["trace"] = r.trace;
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
  r.variant = parse_variant(j.at("variant").get<std::string>());
  r.seed = j.at("seed").is_null() ? std::nullopt
                                  : std::optional<std::uint64_t>(j.at("seed").get<std::uint64_t>());
  j.at("r").get_to(r.r);
  j.at("xi").get_to(r.xi);
  j.at("epsilon").get_to(r.epsilon);
  j.at("p").get_to(r.p);
  j.at("depth").get_to(r.depth);
  r.characteristic_form = parse_characteristic_form(j.at("characteristic_form").get<std::string>());
  j.at("trials").get_to(r.trials);
  j.at("iterations").get_to(r.iterations);
  j.at("best_value").get_to(r.best_value);
  j.at("best_x").get_to(r.best_x);
  j.at("best_point").get_to(r.best_point);
  r.success = j.at("success").is_null() ? std::nullopt
                                        : std::optional<bool>(j.at("success").get<bool>());
  j.at("wall_millis").get_to(r.wall_millis);
  j.at("escapes_clamped").get_to(r.escapes_clamped);
  r.trace = j.contains("trace") ? j.at("trace").get<std::vector<TraceEntry>>()
                                : std::vector<TraceEntry>{};
}

}  // namespace plt
