#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "plt/executor.hpp"
#include "plt/solver.hpp"

namespace {

using namespace std::chrono_literals;

TEST(EvaluateBatch, SinglePointMatchesDirectCall) {
  const auto fn = plt::generate_grishagin(4);
  auto a = plt::make_grishagin_objective(fn, 10);
  auto b = plt::make_grishagin_objective(fn, 10);
  const auto res = plt::evaluate_batch({{0.37}, 2}, a, 1);
  ASSERT_EQ(res.trials.size(), 1u);
  EXPECT_EQ(res.trials[0], b.reduced_eval(0.37));
}

TEST(EvaluateBatch, IndependentOfWorkerCount) {
  const auto fn = plt::generate_grishagin(8);
  const plt::BatchRequest req{{0.91, 0.12, 0.5, 0.33}, 3};
  std::vector<std::vector<plt::Trial>> results;
  for (int w : {1, 2, 4, 8}) {
    auto obj = plt::make_grishagin_objective(fn, 10);
    auto res = plt::evaluate_batch(req, obj, w);
    EXPECT_EQ(obj.eval_count(), 4u);
    results.push_back(std::move(res.trials));
  }
  for (const auto& r : results) EXPECT_EQ(r, results.front());
  for (std::size_t i = 1; i < results.front().size(); ++i) {
    EXPECT_LT(results.front()[i - 1].x, results.front()[i].x);
  }
}

TEST(EvaluateBatch, DelaysOverlap) {
  plt::Objective obj([](std::span<const double> y) { return y[0]; }, plt::CurveSpec::unit(1, 8),
                     10ms);
  const auto res = plt::evaluate_batch({{0.1, 0.2, 0.3, 0.4}, 2}, obj, 4);
  EXPECT_GE(res.wall_duration, 10ms);
  EXPECT_LT(res.wall_duration, 30ms);  // sequential would need 40 ms
}

TEST(EvaluateBatch, FailureNamesThePoint) {
  plt::Objective obj(
      [](std::span<const double> y) {
        if (y[0] > 0.5) throw std::runtime_error("boom");
        return 0.0;
      },
      plt::CurveSpec::unit(1, 8));
  try {
    plt::evaluate_batch({{0.1, 0.75, 0.2}, 2}, obj, 2);
    FAIL() << "expected BatchError";
  } catch (const plt::BatchError& e) {
    EXPECT_EQ(e.point(), 0.75);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(EvaluateBatch, RejectsDuplicatesAndBadWorkers) {
  plt::Objective obj([](std::span<const double>) { return 0.0; }, plt::CurveSpec::unit(1, 8));
  EXPECT_THROW(plt::evaluate_batch({{0.3, 0.3}, 2}, obj, 2), std::invalid_argument);
  EXPECT_THROW(plt::evaluate_batch({{0.3}, 2}, obj, 0), std::invalid_argument);
  EXPECT_THROW(plt::BatchExecutor(0), std::invalid_argument);
  EXPECT_EQ(obj.eval_count(), 0u);
}

TEST(EvaluateBatch, EmptyBatch) {
  plt::Objective obj([](std::span<const double>) { return 0.0; }, plt::CurveSpec::unit(1, 8));
  EXPECT_TRUE(plt::evaluate_batch({{}, 2}, obj, 4).trials.empty());
}

TEST(BatchExecutor, SolverTrajectoryIndependentOfWorkers) {
  for (std::uint64_t seed : {2u, 9u}) {
    const auto fn = plt::generate_grishagin(seed);
    plt::MethodConfig cfg;
    cfg.variant = plt::Variant::PLT;
    cfg.p = 4;
    std::vector<plt::SolveResult> runs;
    for (int w : {1, 2, 4}) {
      auto obj = plt::make_grishagin_objective(fn, 12);
      runs.push_back(plt::solve_with_state(obj, cfg, plt::BatchExecutor(w)));
    }
    for (const auto& r : runs) {
      EXPECT_EQ(r.state.trials, runs.front().state.trials);
      EXPECT_EQ(r.report.best_value, runs.front().report.best_value);
      EXPECT_EQ(r.report.iterations, runs.front().report.iterations);
    }
  }
}

}  // namespace
