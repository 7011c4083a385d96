#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "plt/objective.hpp"

namespace {

using plt::GrishaginFunction;

// Straightforward reference: four separate double loops, trig recomputed per term.
double naive_grishagin(const GrishaginFunction& fn, double x1, double x2) {
  const double pi = std::numbers::pi;
  double s1 = 0.0;
  for (int i = 1; i <= 7; ++i) {
    for (int j = 1; j <= 7; ++j) {
      s1 += fn.a[i - 1][j - 1] * std::sin(i * pi * x1) * std::sin(j * pi * x2);
    }
  }
  for (int i = 1; i <= 7; ++i) {
    for (int j = 1; j <= 7; ++j) {
      s1 += fn.b[i - 1][j - 1] * std::cos(i * pi * x1) * std::cos(j * pi * x2);
    }
  }
  double s2 = 0.0;
  for (int i = 1; i <= 7; ++i) {
    for (int j = 1; j <= 7; ++j) {
      s2 += fn.c[i - 1][j - 1] * std::sin(i * pi * x1) * std::sin(j * pi * x2);
    }
  }
  for (int i = 1; i <= 7; ++i) {
    for (int j = 1; j <= 7; ++j) {
      s2 -= fn.d[i - 1][j - 1] * std::cos(i * pi * x1) * std::cos(j * pi * x2);
    }
  }
  return std::hypot(s1, s2);
}

// Upper bound on the Lipschitz constant of the modulus from the coefficient sums.
double lipschitz_bound(const GrishaginFunction& fn) {
  const double pi = std::numbers::pi;
  double g1x = 0, g1y = 0, g2x = 0, g2y = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      g1x += (std::abs(fn.a[i][j]) + std::abs(fn.b[i][j])) * pi * (i + 1);
      g1y += (std::abs(fn.a[i][j]) + std::abs(fn.b[i][j])) * pi * (j + 1);
      g2x += (std::abs(fn.c[i][j]) + std::abs(fn.d[i][j])) * pi * (i + 1);
      g2y += (std::abs(fn.c[i][j]) + std::abs(fn.d[i][j])) * pi * (j + 1);
    }
  }
  return std::sqrt(g1x * g1x + g1y * g1y + g2x * g2x + g2y * g2y);
}

double sum_of(const plt::CoefMatrix& m, bool alternate) {
  double s = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) s += ((alternate && (i + j) % 2 == 1) ? -1.0 : 1.0) * m[i][j];
  }
  return s;
}

TEST(GenerateGrishagin, DeterministicPerSeed) {
  EXPECT_EQ(plt::generate_grishagin(17), plt::generate_grishagin(17));
  EXPECT_EQ(plt::generate_grishagin(17).seed, 17u);
}

TEST(GenerateGrishagin, SeedsOneToHundredAreDistinctAndInRange) {
  std::vector<GrishaginFunction> fns;
  for (std::uint64_t s = 1; s <= 100; ++s) fns.push_back(plt::generate_grishagin(s));
  std::set<std::vector<double>> coefs;
  for (const auto& fn : fns) {
    std::vector<double> flat;
    for (const auto* m : {&fn.a, &fn.b, &fn.c, &fn.d}) {
      for (const auto& row : *m) {
        for (double v : row) {
          EXPECT_GE(v, -1.0);
          EXPECT_LE(v, 1.0);
          flat.push_back(v);
        }
      }
    }
    coefs.insert(flat);
  }
  EXPECT_EQ(coefs.size(), 100u);
}

TEST(GenerateGrishagin, MatchesCommittedFixture) {
  std::ifstream in(PLT_FIXTURE_DIR "/grishagin_17.json");
  ASSERT_TRUE(in);
  const auto stored = nlohmann::json::parse(in).get<GrishaginFunction>();
  EXPECT_EQ(stored, plt::generate_grishagin(17));
}

TEST(EvalGrishagin, OriginClosedForm) {
  const auto fn = plt::generate_grishagin(3);
  const double expected = std::hypot(sum_of(fn.b, false), sum_of(fn.d, false));
  EXPECT_NEAR(plt::eval_grishagin(fn, 0.0, 0.0), expected, 1e-13);
}

TEST(EvalGrishagin, UpperCornerClosedForm) {
  const auto fn = plt::generate_grishagin(3);
  const double expected = std::hypot(sum_of(fn.b, true), sum_of(fn.d, true));
  EXPECT_NEAR(plt::eval_grishagin(fn, 1.0, 1.0), expected, 1e-12);
}

TEST(EvalGrishagin, Seed17MatchesIndependentSummation) {
  const auto fn = plt::generate_grishagin(17);
  const double v = plt::eval_grishagin(fn, 0.3, 0.7);
  EXPECT_NEAR(v, naive_grishagin(fn, 0.3, 0.7), 1e-12 * v);
  // 40-digit reference evaluation of the fixture coefficients.
  EXPECT_NEAR(v, 1.7766169645424591128, 1e-12 * v);
}

TEST(EvalGrishagin, AgreesWithNaiveOnRandomPoints) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fn = plt::generate_grishagin(seed);
    for (int i = 0; i < 200; ++i) {
      const double x1 = unif(gen), x2 = unif(gen);
      const double v = plt::eval_grishagin(fn, x1, x2);
      EXPECT_GE(v, 0.0);
      EXPECT_NEAR(v, naive_grishagin(fn, x1, x2), 1e-12 * std::max(1.0, v));
    }
  }
}

TEST(EvalGrishagin, OutOfDomainIsError) {
  const auto fn = plt::generate_grishagin(1);
  EXPECT_THROW(plt::eval_grishagin(fn, -0.1, 0.5), std::domain_error);
  EXPECT_THROW(plt::eval_grishagin(fn, 0.5, 1.1), std::domain_error);
}

TEST(EvalGrishagin, LipschitzAndReducedHolderSanity) {
  const auto fn = plt::generate_grishagin(42);
  const double lip = lipschitz_bound(fn);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a1 = unif(gen), a2 = unif(gen), b1 = unif(gen), b2 = unif(gen);
    const double dist = std::hypot(a1 - b1, a2 - b2);
    if (dist == 0.0) continue;
    const double q =
        std::abs(plt::eval_grishagin(fn, a1, a2) - plt::eval_grishagin(fn, b1, b2)) / dist;
    worst = std::max(worst, q);
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LE(worst, lip);

  // Reduced function: |f(x') - f(x'')| <= 4 L d sqrt(N) |x' - x''|^{1/N}.
  const auto obj = plt::make_grishagin_objective(fn, 8, plt::GrishaginGoal::MinModulus);
  const double h = 4.0 * lip * 1.0 * std::sqrt(2.0);
  const double min_gap = std::ldexp(1.0, -16);
  for (int i = 0; i < 10000; ++i) {
    const double a = unif(gen);
    const double b = unif(gen);
    if (std::abs(a - b) < min_gap) continue;
    const double fa = obj.value_at(plt::map_to_domain(a, obj.domain()));
    const double fb = obj.value_at(plt::map_to_domain(b, obj.domain()));
    ASSERT_LE(std::abs(fa - fb), h * std::sqrt(std::abs(a - b)));
  }
}

TEST(Objective, ReducedEvalCountsAndIsPure) {
  plt::Objective obj([](std::span<const double>) { return 3.5; }, plt::CurveSpec::unit(2, 6));
  for (int k = 0; k < 7; ++k) {
    const auto t = obj.reduced_eval(k / 7.0);
    EXPECT_EQ(t.z, 3.5);
    EXPECT_EQ(t.x, k / 7.0);
  }
  EXPECT_EQ(obj.eval_count(), 7u);
}

TEST(Objective, SameCellSameValue) {
  const auto fn = plt::generate_grishagin(5);
  auto obj = plt::make_grishagin_objective(fn, 4);
  const double cell = std::ldexp(1.0, -8);
  const auto a = obj.reduced_eval(37 * cell + 0.1 * cell);
  const auto b = obj.reduced_eval(37 * cell + 0.9 * cell);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.z, b.z);
}

TEST(Objective, GoalFlipsSign) {
  const auto fn = plt::generate_grishagin(5);
  const auto mx = plt::make_grishagin_objective(fn, 6, plt::GrishaginGoal::MaxModulus);
  const auto mn = plt::make_grishagin_objective(fn, 6, plt::GrishaginGoal::MinModulus);
  const std::vector<double> y{0.25, 0.8};
  EXPECT_EQ(mx.value_at(y), -plt::eval_grishagin(fn, 0.25, 0.8));
  EXPECT_EQ(mn.value_at(y), plt::eval_grishagin(fn, 0.25, 0.8));
}

TEST(Objective, ReducedEvalPropagatesDomainError) {
  plt::Objective obj([](std::span<const double>) { return 0.0; }, plt::CurveSpec::unit(1, 4));
  EXPECT_THROW(obj.reduced_eval(1.25), std::domain_error);
  EXPECT_EQ(obj.eval_count(), 0u);
}

TEST(GridOracle, ConstantFunction) {
  plt::Objective obj([](std::span<const double>) { return -2.0; }, plt::CurveSpec::unit(3, 4));
  const auto r = plt::grid_oracle(obj, 5);
  EXPECT_EQ(r.min_value, -2.0);
  EXPECT_EQ(r.resolution, 5);
  EXPECT_EQ(obj.eval_count(), 0u);
}

TEST(GridOracle, SquaredNormOnSymmetricBox) {
  plt::Objective obj(
      [](std::span<const double> y) { return y[0] * y[0] + y[1] * y[1]; },
      plt::CurveSpec(2, 8, {-1.0, -1.0}, {1.0, 1.0}));
  const auto r = plt::grid_oracle(obj, 101);
  EXPECT_EQ(r.min_value, 0.0);
  EXPECT_EQ(r.minimizer, (std::vector<double>{0.0, 0.0}));
}

TEST(GridOracle, RejectsTinyResolution) {
  plt::Objective obj([](std::span<const double>) { return 0.0; }, plt::CurveSpec::unit(1, 4));
  EXPECT_THROW(plt::grid_oracle(obj, 1), std::invalid_argument);
}

// Frozen from a vectorised numpy evaluation of the committed seed-17 coefficients.
TEST(GridOracle, Seed17GroundTruth) {
  const auto fn = plt::generate_grishagin(17);
  for (auto [goal, file] : {std::pair{plt::GrishaginGoal::MinModulus, "oracle_min_17_1000.json"},
                            std::pair{plt::GrishaginGoal::MaxModulus, "oracle_max_17_1000.json"}}) {
    std::ifstream in(std::string(PLT_FIXTURE_DIR) + "/" + file);
    ASSERT_TRUE(in);
    const auto expected = nlohmann::json::parse(in).get<plt::OracleResult>();
    const auto obj = plt::make_grishagin_objective(fn, 12, goal);
    const auto r = plt::grid_oracle(obj, 1000);
    EXPECT_EQ(r.resolution, 1000);
    EXPECT_NEAR(r.min_value, expected.min_value, 1e-12 * std::max(1.0, std::abs(expected.min_value)));
    EXPECT_EQ(r.minimizer, expected.minimizer);
  }
}

TEST(FixtureJson, FunctionRoundTrips) {
  const auto fn = plt::generate_grishagin(77);
  const auto text = nlohmann::json(fn).dump();
  EXPECT_EQ(nlohmann::json::parse(text).get<GrishaginFunction>(), fn);
}

}  // namespace
