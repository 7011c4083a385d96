// Objective functions over a box D and their curve-reduced form f(x) = phi(y(x)).
#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "plt/curve.hpp"

namespace plt {

/// One evaluation of the reduced objective: curve parameter, its image and the value.
struct Trial {
  double x = 0.0;
  std::vector<double> y;
  double z = 0.0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

/// A function phi over the box described by a CurveSpec, with an evaluation counter.
///
/// The counter only tracks evaluations made through reduced_eval(); raw
/// evaluation via value_at() (used by oracles) is not counted.
class Objective {
 public:
  using Function = std::function<double(std::span<const double>)>;

  Objective(Function fn, CurveSpec domain,
            std::chrono::nanoseconds artificial_delay = std::chrono::nanoseconds{0})
      : fn_(std::move(fn)), domain_(std::move(domain)), delay_(artificial_delay) {
    if (!fn_) throw std::invalid_argument("objective: empty function");
    if (delay_.count() < 0) throw std::invalid_argument("objective: negative delay");
  }

  Objective(const Objective&) = delete;
  Objective& operator=(const Objective&) = delete;

  const CurveSpec& domain() const { return domain_; }
  std::chrono::nanoseconds artificial_delay() const { return delay_; }
  void set_artificial_delay(std::chrono::nanoseconds d) { delay_ = d; }

  std::uint64_t eval_count() const { return count_.load(std::memory_order_relaxed); }
  void reset_eval_count() { count_.store(0, std::memory_order_relaxed); }

  double value_at(std::span<const double> y) const { return fn_(y); }

  /// Evaluates f(x) = phi(y(x)) as one trial; sleeps for the artificial delay if set.
  Trial reduced_eval(double x) {
    Trial t;
    t.x = x;
    t.y = map_to_domain(x, domain_);
    t.z = fn_(t.y);
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    count_.fetch_add(1, std::memory_order_relaxed);
    return t;
  }

 private:
  Function fn_;
  CurveSpec domain_;
  std::chrono::nanoseconds delay_;
  std::atomic<std::uint64_t> count_{0};
};

// ---------------------------------------------------------------------------
// Grishagin test class on [0,1]^2:
//
//   phi(x) = sqrt( (sum_ij A_ij a_ij + B_ij b_ij)^2 + (sum_ij C_ij a_ij - D_ij b_ij)^2 )
//   a_ij = sin(i pi x1) sin(j pi x2),  b_ij = cos(i pi x1) cos(j pi x2),  i,j = 1..7
//
// Coefficients are drawn from std::mt19937_64 seeded with the function seed.
// Each 64-bit output u becomes 2 * ((u >> 11) * 2^-53) - 1, a value in
// [-1, 1). Draw order: A row-major, then B, C, D (196 draws in total).
// ---------------------------------------------------------------------------

inline constexpr int kGrishaginOrder = 7;
using CoefMatrix = std::array<std::array<double, kGrishaginOrder>, kGrishaginOrder>;

struct GrishaginFunction {
  std::uint64_t seed = 0;
  CoefMatrix a{};
  CoefMatrix b{};
  CoefMatrix c{};
  CoefMatrix d{};

  friend bool operator==(const GrishaginFunction&, const GrishaginFunction&) = default;
};

inline GrishaginFunction generate_grishagin(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto draw = [&gen] {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * unit - 1.0;
  };
  GrishaginFunction fn;
  fn.seed = seed;
  for (CoefMatrix* m : {&fn.a, &fn.b, &fn.c, &fn.d}) {
    for (auto& row : *m) {
      for (double& v : row) v = draw();
    }
  }
  return fn;
}

inline double eval_grishagin(const GrishaginFunction& fn, double x1, double x2) {
  if (!(x1 >= 0.0 && x1 <= 1.0 && x2 >= 0.0 && x2 <= 1.0)) {
    throw std::domain_error("grishagin: point (" + std::to_string(x1) + ", " +
                            std::to_string(x2) + ") outside [0,1]^2");
  }
  std::array<double, kGrishaginOrder> s1{}, c1{}, s2{}, c2{};
  for (int i = 0; i < kGrishaginOrder; ++i) {
    const double k = std::numbers::pi * (i + 1);
    s1[i] = std::sin(k * x1);
    c1[i] = std::cos(k * x1);
    s2[i] = std::sin(k * x2);
    c2[i] = std::cos(k * x2);
  }
  double sum1 = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < kGrishaginOrder; ++i) {
    for (int j = 0; j < kGrishaginOrder; ++j) {
      const double aij = s1[i] * s2[j];
      const double bij = c1[i] * c2[j];
      sum1 += fn.a[i][j] * aij + fn.b[i][j] * bij;
      sum2 += fn.c[i][j] * aij - fn.d[i][j] * bij;
    }
  }
  return std::sqrt(sum1 * sum1 + sum2 * sum2);
}

/// Which extremum of the modulus a Grishagin objective searches for.
///
/// The class is traditionally posed as locating the largest modulus, i.e.
/// minimising phi = -modulus; MinModulus minimises the modulus itself.
enum class GrishaginGoal { MaxModulus, MinModulus };

inline std::string_view to_string(GrishaginGoal g) {
  return g == GrishaginGoal::MaxModulus ? "max" : "min";
}

inline GrishaginGoal parse_grishagin_goal(std::string_view s) {
  if (s == "max") return GrishaginGoal::MaxModulus;
  if (s == "min") return GrishaginGoal::MinModulus;
  throw std::invalid_argument("unknown goal '" + std::string(s) + "' (expected max or min)");
}

/// Objective on [0,1]^2 built from a Grishagin function at the given curve depth.
inline Objective make_grishagin_objective(GrishaginFunction fn, int depth,
                                          GrishaginGoal goal = GrishaginGoal::MaxModulus,
                                          std::chrono::nanoseconds delay = {}) {
  const double sign = goal == GrishaginGoal::MaxModulus ? -1.0 : 1.0;
  auto f = [g = std::move(fn), sign](std::span<const double> y) {
    return sign * eval_grishagin(g, y[0], y[1]);
  };
  return Objective(std::move(f), CurveSpec::unit(2, depth), delay);
}

inline void to_json(nlohmann::json& j, const GrishaginFunction& fn) {
  j = nlohmann::json{{"seed", fn.seed}, {"A", fn.a}, {"B", fn.b}, {"C", fn.c}, {"D", fn.d}};
}

inline void from_json(const nlohmann::json& j, GrishaginFunction& fn) {
  j.at("seed").get_to(fn.seed);
  j.at("A").get_to(fn.a);
  j.at("B").get_to(fn.b);
  j.at("C").get_to(fn.c);
  j.at("D").get_to(fn.d);
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle
// ---------------------------------------------------------------------------

struct OracleResult {
  double min_value = 0.0;
  std::vector<double> minimizer;
  int resolution = 0;

  friend bool operator==(const OracleResult&, const OracleResult&) = default;
};

inline void to_json(nlohmann::json& j, const OracleResult& r) {
  j = nlohmann::json{
      {"min_value", r.min_value}, {"minimizer", r.minimizer}, {"resolution", r.resolution}};
}

inline void from_json(const nlohmann::json& j, OracleResult& r) {
  j.at("min_value").get_to(r.min_value);
  j.at("minimizer").get_to(r.minimizer);
  j.at("resolution").get_to(r.resolution);
}

/// Minimum of phi over the uniform resolution^N grid covering D, boundary included.
/// Does not touch the objective's trial counter. Ties keep the first grid point
/// in row-major order (last axis fastest).
inline OracleResult grid_oracle(const Objective& obj, int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid_oracle: resolution must be >= 2");
  const CurveSpec& dom = obj.domain();
  const int n = dom.dim();

  std::vector<std::vector<double>> axes(n, std::vector<double>(resolution));
  for (int i = 0; i < n; ++i) {
    const double lo = dom.lower()[i];
    const double hi = dom.upper()[i];
    for (int k = 0; k < resolution; ++k) {
      axes[i][k] = k == resolution - 1 ? hi : lo + (hi - lo) * k / (resolution - 1);
    }
  }

  OracleResult best;
  best.resolution = resolution;
  best.min_value = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  std::vector<double> y(n);
  for (;;) {
    for (int i = 0; i < n; ++i) y[i] = axes[i][idx[i]];
    const double v = obj.value_at(y);
    if (v < best.min_value) {
      best.min_value = v;
      best.minimizer = y;
    }
    int axis = n - 1;
    while (axis >= 0 && ++idx[axis] == resolution) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return best;
}

}  // namespace plt
