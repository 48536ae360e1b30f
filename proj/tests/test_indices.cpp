#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "asp/indices.hpp"
#include "asp/scenarios.hpp"
#include "support/oracles.hpp"

using namespace asp;

namespace {

const double kE = std::numbers::e;

// Samplewise sum of two independent jobs drawn from one scenario set.
std::vector<double> sum_samples(const DurationDistribution& a, const DurationDistribution& b, std::size_t m,
                                std::uint64_t seed) {
  const auto sc = sample_matrix(std::vector{a, b}, m, seed);
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) out[r] = sc.duration(r, 0) + sc.duration(r, 1);
  return out;
}

std::vector<double> samples_of(const DurationDistribution& d, std::size_t m, std::uint64_t seed) {
  return sample_matrix(std::vector{d}, m, seed).column(0);
}

}  // namespace

TEST(Newsvendor, GoldenValues) {
  const auto u = index_newsvendor(1, 1, DurationDistribution::uniform(0, 1));
  EXPECT_EQ(u.value, 0.25);
  EXPECT_EQ(u.method, IndexMethod::closed_form);
  EXPECT_EQ(u.std_error, 0.0);
  EXPECT_EQ(u.minimizing_s, 0.5);
  EXPECT_NEAR(index_newsvendor(1, 1, DurationDistribution::piecewise_quadratic()).value, 0.25, 1e-10);
  const auto asym = index_newsvendor(2, 1, DurationDistribution::uniform(0, 1));
  EXPECT_NEAR(asym.minimizing_s, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(asym.value, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(index_newsvendor(2, 5, DurationDistribution::point_mass(3.0)).value, 0.0);
  EXPECT_NEAR(index_newsvendor(1, 1, DurationDistribution::exponential(1)).value, std::log(2.0), 1e-14);
}

TEST(Newsvendor, LogNormalMatchesClosedFormPartialExpectation) {
  for (double mu : {-0.5, 0.0, 1.0, 2.0}) {
    for (double s2 : {0.5, 1.0, 1.5, 2.0}) {
      for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{1.0, 3.0}, std::pair{4.0, 1.0}}) {
        const auto d = DurationDistribution::lognormal(mu, s2);
        const auto v = index_newsvendor(a, b, d);
        const double ref = oracle::lognormal_newsvendor(a, b, mu, s2, v.minimizing_s);
        EXPECT_NEAR(v.value, ref, 1e-9 * (1 + ref)) << mu << " " << s2;
      }
    }
  }
}

TEST(Newsvendor, PiecewiseQuadraticAsymmetricAgainstSimpson) {
  const auto d = DurationDistribution::piecewise_quadratic();
  const double a = 1.0, b = 2.0;
  const auto v = index_newsvendor(a, b, d);
  const double q = v.minimizing_s;
  // Split at the kink q as well as at the density jump.
  const auto f = [&](bool right) {
    return [&, right](double x) { return (x < q ? a * (q - x) : b * (x - q)) * oracle::pq_density(x, right); };
  };
  const double ref = oracle::simpson(f(false), 0, std::min(q, 0.5)) + oracle::simpson(f(false), std::min(q, 0.5), 0.5) +
                     oracle::simpson(f(true), 0.5, std::max(q, 0.5)) + oracle::simpson(f(true), std::max(q, 0.5), 1.0);
  EXPECT_NEAR(v.value, ref, 1e-9);
}

TEST(Newsvendor, DiscreteAndEmpirical) {
  const auto d = DurationDistribution::discrete({{1, 0.5}, {3, 0.5}});
  // q = 1 (left-continuous inverse at 1/2): E|X - 1| = 1.
  EXPECT_DOUBLE_EQ(index_newsvendor(1, 1, d).value, 1.0);
  const auto e = DurationDistribution::empirical({1, 2, 3, 4, 10});
  // q = 3: (2 + 1 + 0 + 1 + 7) / 5.
  EXPECT_DOUBLE_EQ(index_newsvendor(1, 1, e).value, 11.0 / 5.0);
  EXPECT_THROW(index_newsvendor(0, 1, d), DomainError);
}

TEST(Variance, Values) {
  const double target = std::pow(kE, 3) * (kE - 1);
  EXPECT_NEAR(index_variance(DurationDistribution::lognormal(1, 1)).value, target, 1e-10 * target);
  EXPECT_NEAR(index_variance(DurationDistribution::lognormal(0.5 * std::log(kE / (kE + 1)), 2)).value, target,
              1e-10 * target);
  EXPECT_DOUBLE_EQ(index_variance(DurationDistribution::uniform(0, 1)).value, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(index_variance(DurationDistribution::uniform(0, 1)).minimizing_s, 0.5);
}

TEST(Variance, ShiftInvariantForDiscrete) {
  const auto a = DurationDistribution::discrete({{1, 0.2}, {2, 0.3}, {6, 0.5}});
  const auto b = DurationDistribution::discrete({{11, 0.2}, {12, 0.3}, {16, 0.5}});
  EXPECT_NEAR(index_variance(a).value, index_variance(b).value, 1e-12);
}

TEST(General, Examples) {
  const auto u = index_general(CostFunction::l1(1, 1), DurationDistribution::uniform(0, 1), 1000000, 1);
  EXPECT_NEAR(u.value, 0.25, 0.003);
  EXPECT_EQ(u.method, IndexMethod::sample_based);
  EXPECT_GT(u.std_error, 0.0);
  const auto pm = index_general(CostFunction::l2(), DurationDistribution::point_mass(4.0), 1000, 1);
  EXPECT_NEAR(pm.value, 0.0, 1e-12);
  EXPECT_NEAR(pm.minimizing_s, 4.0, 1e-6);
  const double target = std::pow(kE, 3) * (kE - 1);
  EXPECT_NEAR(index_general(CostFunction::l2(), DurationDistribution::lognormal(1, 1), 1000000, 1).value, target,
              0.05 * target);
  EXPECT_THROW(index_general(CostFunction::l2(), DurationDistribution::uniform(0, 1), 999, 1), DomainError);
}

TEST(General, MinimumAtZeroForToleranceWithWideIdleBand) {
  // Everything inside the idle tolerance: s = 0 is optimal with value 0.
  const auto v = index_general(CostFunction::tolerance(1, 1, 0.0, 5.0), DurationDistribution::uniform(0, 1), 2000, 1);
  EXPECT_NEAR(v.value, 0.0, 1e-12);
}

TEST(General, ConsistentWithClosedForms) {
  const std::vector dists{DurationDistribution::uniform(0, 2), DurationDistribution::exponential(1.5),
                          DurationDistribution::lognormal(0, 0.5), DurationDistribution::piecewise_quadratic()};
  std::uint64_t seed = 1;
  for (const auto& d : dists) {
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{1.0, 3.0}}) {
      const auto s = index_general(CostFunction::l1(a, b), d, 200000, seed++);
      EXPECT_NEAR(s.value, index_newsvendor(a, b, d).value, 3 * s.std_error) << format_distribution(d);
    }
    const auto s2 = index_general(CostFunction::l2(), d, 200000, seed++);
    EXPECT_NEAR(s2.value, index_variance(d).value, 3 * s2.std_error) << format_distribution(d);
  }
}

TEST(Lemmas, Subadditivity) {
  const std::vector dists{DurationDistribution::uniform(0, 1), DurationDistribution::exponential(1),
                          DurationDistribution::lognormal(0, 0.5), DurationDistribution::piecewise_quadratic()};
  std::uint64_t seed = 100;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    for (std::size_t j = i; j < dists.size(); ++j) {
      const auto sum = sum_samples(dists[i], dists[j], 200000, seed++);
      const auto s1 = index_from_samples(CostFunction::l1(1, 1), sum);
      EXPECT_LE(s1.value, index_newsvendor(1, 1, dists[i]).value + index_newsvendor(1, 1, dists[j]).value +
                              3 * s1.std_error);
      const auto s2 = index_from_samples(CostFunction::l2(), sum);
      EXPECT_LE(s2.value, index_variance(dists[i]).value + index_variance(dists[j]).value + 3 * s2.std_error);
    }
  }
}

TEST(Lemmas, MaxWithConstantDoesNotRaiseIndex) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> cut(0.0, 3.0);
  const std::vector dists{DurationDistribution::uniform(0, 2), DurationDistribution::exponential(1),
                          DurationDistribution::lognormal(0, 0.5)};
  const std::vector costs{CostFunction::l1(1, 1), CostFunction::l1(1, 3), CostFunction::l2(),
                          CostFunction::tolerance(1, 2, 0.1, 0.1)};
  std::uint64_t seed = 200;
  for (const auto& d : dists) {
    auto xs = samples_of(d, 100000, seed++);
    for (const auto& g : costs) {
      const auto base = index_from_samples(g, xs);
      const double c = cut(gen);
      auto clipped = xs;
      for (auto& v : clipped) v = std::max(v, c);
      const auto top = index_from_samples(g, clipped);
      EXPECT_LE(top.value, base.value + 3 * base.std_error) << format_cost(g) << " c=" << c;
    }
  }
}

TEST(Lemmas, SumDominatesEachSummand) {
  const std::vector costs{CostFunction::l1(1, 1), CostFunction::l2(), CostFunction::tolerance(1, 2, 0.1, 0.1)};
  const auto a = DurationDistribution::lognormal(0, 0.8);
  const auto b = DurationDistribution::uniform(0, 3);
  const auto sc = sample_matrix(std::vector{a, b}, 200000, 300);
  const auto xa = sc.column(0);
  const auto xb = sc.column(1);
  std::vector<double> sum(xa.size());
  for (std::size_t r = 0; r < sum.size(); ++r) sum[r] = xa[r] + xb[r];
  for (const auto& g : costs) {
    const auto s = index_from_samples(g, sum);
    EXPECT_LE(std::max(index_from_samples(g, xa).value, index_from_samples(g, xb).value), s.value + 3 * s.std_error)
        << format_cost(g);
  }
}

TEST(SequencingIndex, MapsCostToIndex) {
  const auto d = DurationDistribution::lognormal(0.5, 1);
  EXPECT_EQ(sequencing_index(CostFunction::l1(1, 2), d, 1000, 1).value, index_newsvendor(1, 2, d).value);
  EXPECT_EQ(sequencing_index(CostFunction::l2(), d, 1000, 1).value, index_variance(d).value);
  EXPECT_EQ(sequencing_index(CostFunction::tolerance(1, 1, 0, 0), d, 1000, 1).method, IndexMethod::sample_based);
}
