#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lexsched/baselines.hpp"
#include "oracles.hpp"

using namespace lexsched;

namespace {

Instance twelve_and_twos() { return Instance::from_times(4, {12, 2, 2, 2, 2, 2, 2}); }

}  // namespace

TEST(ConstrainedMin, Examples) {
  auto inst = Instance::from_times(2, {3, 2, 1});
  EXPECT_EQ(solve_constrained_min(inst, 1, {}).value, 3);
  auto second = solve_constrained_min(inst, 2, {3});
  EXPECT_EQ(second.value, 3);
  EXPECT_EQ(completion_vector(second.witness), CompletionVector({3, 3}));
  EXPECT_EQ(solve_constrained_min(Instance(2, {}), 1, {}).value, 0);
  EXPECT_THROW(solve_constrained_min(inst, 2, {2}), ValidationError);
  EXPECT_THROW(solve_constrained_min(inst, 2, {}), DimensionError);
}

TEST(Sequential, Examples) {
  EXPECT_EQ(sequential_method(twelve_and_twos()).vector, CompletionVector({12, 4, 4, 4}));
  EXPECT_EQ(sequential_method(Instance::from_times(2, {3, 2, 1})).vector, CompletionVector({3, 3}));
  EXPECT_EQ(sequential_method(Instance::from_times(1, {4, 5, 6})).vector, CompletionVector({15}));
}

TEST(Sequential, PrefixConsistency) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto inst = Instance::from_times(m, oracle::random_times(rng, 7, 1, 25));
    std::vector<Time> prefix;
    for (std::size_t i = 1; i <= static_cast<std::size_t>(m); ++i) {
      auto step = solve_constrained_min(inst, i, prefix);
      auto v = completion_vector(step.witness);
      for (std::size_t q = 0; q + 1 < i; ++q) EXPECT_EQ(v[q], prefix[q]);
      EXPECT_EQ(v[i - 1], step.value);
      prefix.push_back(step.value);
    }
  }
}

TEST(Weighting, Examples) {
  auto small = weighting_method(Instance::from_times(2, {3, 2, 1}));
  EXPECT_EQ(small.vector, CompletionVector({3, 3}));
  EXPECT_EQ(*small.weight, 9);
  auto four = weighting_method(Instance::from_times(3, {4, 2, 2, 2}));
  EXPECT_EQ(four.vector, CompletionVector({4, 4, 2}));
  EXPECT_EQ(*four.weight, 26);
  auto empty = weighting_method(Instance(2, {}));
  EXPECT_EQ(*empty.weight, 0);
  EXPECT_THROW(weighting_method(Instance(2, {}), 1), ValidationError);
}

TEST(Weighting, TieBetweenDistinctVectorsIsResolvedLexicographically) {
  // (18,18,13) and (19,15,15) both weigh 121
  auto inst = Instance::from_times(3, {13, 9, 9, 6, 6, 6});
  auto r = weighting_method(inst);
  EXPECT_TRUE(r.weight_tie);
  EXPECT_EQ(*r.weight, 121);
  EXPECT_EQ(r.vector, CompletionVector({18, 18, 13}));
  EXPECT_EQ(r.vector, solve_lexopt(inst).vector);
}

TEST(Weighting, OptimumWeightIsMinimalOverAllAssignments) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 80; ++trial) {
    int m = 2 + static_cast<int>(rng() % 2);
    auto p = oracle::random_times(rng, 6, 1, 12);
    auto r = weighting_method(Instance::from_times(m, p));
    oracle::each_assignment(m, p.size(), [&](const std::vector<int>& a) {
      EXPECT_LE(*r.weight, weighted_value(CompletionVector(oracle::sorted_loads(m, p, a))));
    });
  }
}

TEST(HighestRank, Examples) {
  EXPECT_EQ(highest_rank_method(Instance::from_times(2, {3, 2, 1})).vector, CompletionVector({3, 3}));
  auto fig = highest_rank_method(twelve_and_twos());
  EXPECT_EQ(fig.vector, CompletionVector({12, 4, 4, 4}));
  auto streaming = highest_rank_method(twelve_and_twos(), 1);
  EXPECT_EQ(streaming.vector, CompletionVector({12, 4, 4, 4}));
  EXPECT_TRUE(streaming.pool_saturated);
}

TEST(HighestRank, PoolHoldsBalancedAndUnbalancedShapes) {
  auto pool = makespan_optimal_pool(twelve_and_twos(), 12, 2000);
  ASSERT_TRUE(pool.complete);
  std::set<std::vector<Time>> shapes;
  for (const auto& e : pool.entries) {
    EXPECT_EQ(e.vector[0], 12);
    shapes.insert(e.vector.values());
  }
  EXPECT_TRUE(shapes.count({12, 12, 0, 0}));
  EXPECT_TRUE(shapes.count({12, 4, 4, 4}));
}

TEST(HighestRank, PoolEntriesAreMakespanOptimal) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    int m = 2 + static_cast<int>(rng() % 2);
    auto p = oracle::random_times(rng, 7, 1, 10);
    auto opt = oracle::min_makespan(m, p);
    auto pool = makespan_optimal_pool(Instance::from_times(m, p), opt, 50);
    ASSERT_FALSE(pool.entries.empty());
    for (const auto& e : pool.entries) EXPECT_EQ(makespan(e.schedule), opt);
  }
}

TEST(BestSchedules, ReturnsLexSmallestDistinct) {
  auto pool = best_schedules(Instance::from_times(2, {1, 1}), 50);
  EXPECT_EQ(pool.entries.size(), 2u);  // (1,1) and (2,0) up to symmetry
  EXPECT_EQ(pool.entries[0].vector, CompletionVector({1, 1}));
  EXPECT_EQ(pool.entries[1].vector, CompletionVector({2, 0}));

  std::mt19937_64 rng(59);
  auto p = oracle::random_times(rng, 7, 1, 9);
  auto inst = Instance::from_times(3, p);
  auto full = best_schedules(inst, 100000);
  auto top = best_schedules(inst, 10);
  ASSERT_EQ(top.entries.size(), 10u);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(top.entries[k].vector, full.entries[k].vector);
  EXPECT_EQ(top.entries.front().vector.values(), oracle::lexmin_vector(3, p));
}

TEST(Methods, AgreeWithBranchAndBound) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 120; ++trial) {
    int m = 2 + static_cast<int>(rng() % 2);
    auto inst = Instance::from_times(m, oracle::random_times(rng, 1 + rng() % 8, 1, 30));
    auto expect = solve_lexopt(inst).vector;
    EXPECT_EQ(sequential_method(inst).vector, expect);
    EXPECT_EQ(weighting_method(inst).vector, expect);
    EXPECT_EQ(highest_rank_method(inst).vector, expect);
  }
}

TEST(Methods, TimeoutsReportStatus) {
  std::mt19937_64 rng(67);
  auto inst = Instance::from_times(3, oracle::random_times(rng, 12, 100, 999));
  Limits tight;
  tight.nodes = 5;
  EXPECT_EQ(sequential_method(inst, tight).status, Status::timeout);
  EXPECT_EQ(weighting_method(inst, 2, tight).status, Status::timeout);
  EXPECT_EQ(highest_rank_method(inst, 2000, tight).status, Status::timeout);
}
