// Synchronous batch evaluation of reduced-objective trials.
//
// One call evaluates every point of a batch on up to `workers` threads and
// returns only once all of them have completed, so the solver never observes
// a partially evaluated iteration. Results are sorted by x, which makes the
// output independent of completion order and worker count.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "plt/objective.hpp"

namespace plt {

struct BatchRequest {
  std::vector<double> points;
  std::uint64_t iteration = 0;
};

struct BatchResult {
  std::vector<Trial> trials;
  std::chrono::nanoseconds wall_duration{0};
};

/// Raised when one evaluation of a batch fails; carries the offending point.
class BatchError : public std::runtime_error {
 public:
  BatchError(double point, const std::string& what)
      : std::runtime_error("evaluation at x = " + std::to_string(point) + " failed: " + what),
        point_(point) {}
  double point() const { return point_; }

 private:
  double point_;
};

inline BatchResult evaluate_batch(const BatchRequest& req, Objective& obj, int workers) {
  if (workers < 1) throw std::invalid_argument("evaluate_batch: workers must be >= 1");
  {
    auto sorted = req.points;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("evaluate_batch: duplicate points in batch");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = req.points.size();
  std::vector<Trial> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        out[i] = obj.reduced_eval(req.points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t helpers = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (helpers <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(helpers - 1);
    for (std::size_t w = 1; w < helpers; ++w) pool.emplace_back(drain);
    drain();
  }  // jthreads join here

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw BatchError(req.points[i], e.what());
    } catch (...) {
      throw BatchError(req.points[i], "unknown error");
    }
  }

  std::sort(out.begin(), out.end(), [](const Trial& a, const Trial& b) { return a.x < b.x; });
  return {std::move(out), std::chrono::steady_clock::now() - start};
}

/// Fixed-width executor handed to the solver.
class BatchExecutor {
 public:
  explicit BatchExecutor(int workers = 1) : workers_(workers) {
    if (workers_ < 1) throw std::invalid_argument("executor: workers must be >= 1");
  }
  int workers() const { return workers_; }
  BatchResult evaluate(const BatchRequest& req, Objective& obj) const {
    return evaluate_batch(req, obj, workers_);
  }

 private:
  int workers_;
};

}  // namespace plt
