#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "asp/sequencing.hpp"
#include "support/oracles.hpp"

using namespace asp;

namespace {

std::vector<DurationDistribution> table2() {
  std::vector<DurationDistribution> out;
  const double mu[] = {1, 0.9, 0.8, 0.7, 0.6, 0.5};
  const double s2[] = {1, 1.05, 1.1, 1.15, 1.2, 1.25};
  for (int i = 0; i < 6; ++i) out.push_back(DurationDistribution::lognormal(mu[i], s2[i]));
  return out;
}

}  // namespace

TEST(Heuristic, Table2OrderMatchesClosedFormIndices) {
  const double mu[] = {1, 0.9, 0.8, 0.7, 0.6, 0.5};
  const double s2[] = {1, 1.05, 1.1, 1.15, 1.2, 1.25};
  std::vector<double> ref(6);
  for (int i = 0; i < 6; ++i) ref[i] = oracle::lognormal_newsvendor(1, 1, mu[i], s2[i], std::exp(mu[i]));
  std::vector<std::size_t> expect(6);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  std::stable_sort(expect.begin(), expect.end(), [&](auto a, auto b) { return ref[a] < ref[b]; });
  const auto jobs = table2();
  EXPECT_EQ(heuristic_sequence(CostFunction::l1(1, 1), jobs), expect);
}

TEST(Heuristic, TiesKeepJobOrderAndSingleJob) {
  const std::vector same(4, DurationDistribution::exponential(2));
  EXPECT_EQ(heuristic_sequence(CostFunction::l2(), same), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(heuristic_sequence(CostFunction::l1(1, 1), same), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(heuristic_sequence(CostFunction::l2(), std::vector{DurationDistribution::uniform(0, 1)}),
            (std::vector<std::size_t>{0}));
  EXPECT_THROW(heuristic_sequence(CostFunction::l2(), std::vector<DurationDistribution>{}), DomainError);
}

TEST(Heuristic, VarianceOrderUnderL2) {
  const std::vector jobs{DurationDistribution::uniform(0, 4), DurationDistribution::uniform(0, 1),
                         DurationDistribution::exponential(1)};
  EXPECT_EQ(heuristic_sequence(CostFunction::l2(), jobs), (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Bounds, Formula) {
  const auto x = DurationDistribution::uniform(0, 1);
  const auto b2 = bounds(1, 1, 1, std::vector{x, DurationDistribution::exponential(1)});
  EXPECT_EQ(b2.lower, 0.25);
  EXPECT_EQ(b2.upper, 0.25);
  const double v = index_variance(DurationDistribution::exponential(3)).value;
  const auto b3 = bounds(2, 1, 1, std::vector(3, DurationDistribution::exponential(3)));
  EXPECT_NEAR(b3.lower, 2 * v, 1e-15);
  EXPECT_NEAR(b3.upper, 3 * v, 1e-15);
  EXPECT_THROW(bounds(3, 1, 1, std::vector{x, x}), DomainError);
  EXPECT_FALSE(bounds_for(CostFunction::tolerance(1, 1, 0.1, 0.1), std::vector{x, x}).has_value());
}

TEST(Bounds, AscendingIndexMinimizesUpperBound) {
  const std::vector jobs{DurationDistribution::lognormal(0, 1), DurationDistribution::uniform(0, 3),
                         DurationDistribution::exponential(0.7), DurationDistribution::lognormal(0.5, 0.4)};
  for (int k : {1, 2}) {
    const auto g = k == 1 ? CostFunction::l1(1, 1) : CostFunction::l2();
    const auto best = heuristic_sequence(g, jobs);
    auto ordered = [&](const std::vector<std::size_t>& p) {
      std::vector<DurationDistribution> out;
      for (auto i : p) out.push_back(jobs[i]);
      return out;
    };
    const double best_upper = bounds(k, 1, 1, ordered(best)).upper;
    std::vector<std::size_t> p{0, 1, 2, 3};
    do {
      EXPECT_LE(best_upper, bounds(k, 1, 1, ordered(p)).upper + 1e-12);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST(HeuristicSchedule, TwoJobs) {
  const auto s1 = heuristic_schedule(
      1, 1, 1, std::vector{DurationDistribution::exponential(1), DurationDistribution::exponential(1)}, 100000, 1);
  EXPECT_NEAR(s1.times()[0], std::log(2.0), 0.01);
  const auto s2 = heuristic_schedule(
      2, 1, 1, std::vector{DurationDistribution::uniform(0, 1), DurationDistribution::uniform(0, 1)}, 100000, 1);
  EXPECT_NEAR(s2.times()[0], 0.5, 0.005);
}

TEST(HeuristicSchedule, SandwichedBetweenOptimumAndUpperBound) {
  const std::vector jobs{DurationDistribution::lognormal(0, 1), DurationDistribution::uniform(0, 3),
                         DurationDistribution::exponential(0.7), DurationDistribution::lognormal(0.5, 0.4)};
  const std::size_t m = 50000;
  for (int k : {1, 2}) {
    const auto g = k == 1 ? CostFunction::l1(1, 1) : CostFunction::l2();
    const auto s = heuristic_schedule(k, 1, 1, jobs, m, 5);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s.times()[i - 1], s.times()[i]);
    const auto sc = sample_matrix(jobs, m, 5);
    const auto est = saa_objective(g, s, sc);
    const auto opt = solve_schedule(g, sc);
    EXPECT_GE(est.value, opt.value - 1e-12);
    EXPECT_LE(est.value, bounds(k, 1, 1, jobs).upper + 3 * est.std_error);
  }
}

TEST(HeuristicSchedule, Validation) {
  const std::vector jobs{DurationDistribution::exponential(1), DurationDistribution::exponential(1)};
  EXPECT_THROW(heuristic_schedule(1, 1, 1, jobs, 9999, 1), DomainError);
  EXPECT_THROW(heuristic_schedule(0, 1, 1, jobs, 10000, 1), DomainError);
}

TEST(BruteForce, TwoJobsAscendingIndexWins) {
  const std::vector jobs{DurationDistribution::uniform(0, 4), DurationDistribution::uniform(0, 1)};
  for (const auto& g : {CostFunction::l1(1, 1), CostFunction::l2()}) {
    const auto bf = brute_force_sequence(g, jobs, 10000, 3);
    EXPECT_EQ(bf.best.permutation, (std::vector<std::size_t>{1, 0}));
    EXPECT_EQ(bf.best.method, SequencingMethod::brute_force);
    ASSERT_EQ(bf.table.size(), 2u);
    ASSERT_TRUE(bf.vs_runner_up.has_value());
    EXPECT_LT(bf.vs_runner_up->ci95.high, 0.0);
  }
}

TEST(BruteForce, ReportInvariants) {
  const std::vector jobs{DurationDistribution::lognormal(0, 1), DurationDistribution::uniform(0, 3),
                         DurationDistribution::exponential(0.7)};
  const auto bf = brute_force_sequence(CostFunction::l1(1, 1), jobs, 20000, 4);
  ASSERT_EQ(bf.table.size(), 6u);
  for (std::size_t i = 1; i < bf.table.size(); ++i) EXPECT_LE(bf.table[i - 1].solve.value, bf.table[i].solve.value);
  const auto& r = bf.best;
  auto sorted = r.permutation;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2}));
  const double half = r.ci95.high - r.est_cost;
  ASSERT_TRUE(r.lower_bound && r.upper_bound);
  EXPECT_LE(*r.lower_bound, r.est_cost + half);
  EXPECT_LE(r.est_cost, *r.upper_bound + half);
}

TEST(BruteForce, LastJobNeverMatters) {
  // Replacing the job that ends up last changes nothing for orders that end with it.
  const auto a = DurationDistribution::lognormal(0, 1);
  const auto b = DurationDistribution::uniform(0, 3);
  const auto one = brute_force_sequence(CostFunction::l1(1, 2),
                                        std::vector{a, b, DurationDistribution::exponential(0.7)}, 10000, 6);
  const auto two = brute_force_sequence(CostFunction::l1(1, 2),
                                        std::vector{a, b, DurationDistribution::point_mass(9.0)}, 10000, 6);
  auto cost_of = [](const BruteForceResult& r, std::vector<std::size_t> p) {
    for (const auto& row : r.table) {
      if (row.permutation == p) return row.solve.value;
    }
    return -1.0;
  };
  EXPECT_EQ(cost_of(one, {0, 1, 2}), cost_of(two, {0, 1, 2}));
  EXPECT_EQ(cost_of(one, {1, 0, 2}), cost_of(two, {1, 0, 2}));
}

TEST(BruteForce, CapsAndPreconditions) {
  const std::vector ten(10, DurationDistribution::exponential(1));
  EXPECT_THROW(brute_force_sequence(CostFunction::l2(), ten, 10000, 1), RefusedError);
  const std::vector two(2, DurationDistribution::exponential(1));
  EXPECT_THROW(brute_force_sequence(CostFunction::l2(), two, 9999, 1), DomainError);
  const auto single = brute_force_sequence(CostFunction::l2(), std::vector{DurationDistribution::exponential(1)}, 10000, 1);
  EXPECT_EQ(single.best.permutation, (std::vector<std::size_t>{0}));
  EXPECT_EQ(single.best.est_cost, 0.0);
}

TEST(Paired, IdenticalPairsHaveZeroDifference) {
  const std::vector jobs{DurationDistribution::exponential(1), DurationDistribution::exponential(2)};
  const auto sc = sample_matrix(jobs, 1000, 1);
  const auto s = Schedule::from_times(std::vector{0.8});
  const std::vector<std::size_t> order{0, 1};
  const auto d = paired_comparison(CostFunction::l2(), sc, order, s, order, s);
  EXPECT_EQ(d.mean_diff, 0.0);
  EXPECT_EQ(d.std_error, 0.0);
}
