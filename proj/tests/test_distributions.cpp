#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "asp/distributions.hpp"
#include "asp/scenarios.hpp"
#include "support/oracles.hpp"

using namespace asp;

namespace {

const double kE = std::numbers::e;

std::vector<DurationDistribution> parametric() {
  return {DurationDistribution::uniform(0, 1),       DurationDistribution::uniform(2, 5),
          DurationDistribution::exponential(1),      DurationDistribution::exponential(0.3),
          DurationDistribution::lognormal(1, 1),     DurationDistribution::lognormal(-0.5, 2),
          DurationDistribution::piecewise_quadratic()};
}

}  // namespace

TEST(Quantile, Examples) {
  EXPECT_DOUBLE_EQ(quantile(DurationDistribution::uniform(0, 1), 0.5), 0.5);
  EXPECT_DOUBLE_EQ(quantile(DurationDistribution::piecewise_quadratic(), 0.5), 0.5);
  EXPECT_NEAR(quantile(DurationDistribution::exponential(1), 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(quantile(DurationDistribution::piecewise_quadratic(), 0.32), 0.4, 1e-15);
}

TEST(Quantile, RejectsProbabilitiesOutsideOpenUnitInterval) {
  const auto d = DurationDistribution::uniform(0, 1);
  EXPECT_THROW(quantile(d, 0.0), DomainError);
  EXPECT_THROW(quantile(d, 1.0), DomainError);
  EXPECT_THROW(quantile(d, -0.1), DomainError);
  EXPECT_THROW(quantile(d, std::nan("")), DomainError);
}

TEST(Quantile, CdfRoundTripOnParametricVariants) {
  for (const auto& d : parametric()) {
    for (int k = 1; k <= 99; ++k) {
      const double p = k / 100.0;
      EXPECT_NEAR(cdf(d, quantile(d, p)), p, 1e-10) << format_distribution(d) << " p=" << p;
    }
  }
}

TEST(Quantile, MonotoneOnRandomPairs) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  auto all = parametric();
  all.push_back(DurationDistribution::discrete({{1, 0.2}, {0.5, 0.3}, {4, 0.5}}));
  all.push_back(DurationDistribution::empirical({3, 1, 2, 2, 8}));
  for (const auto& d : all) {
    for (int i = 0; i < 1000; ++i) {
      double a = u(gen), b = u(gen);
      if (a > b) std::swap(a, b);
      EXPECT_LE(quantile(d, a), quantile(d, b));
    }
  }
}

TEST(Quantile, DiscreteIsLeftContinuousInverse) {
  const auto d = DurationDistribution::discrete({{2, 0.25}, {1, 0.25}, {5, 0.5}});
  EXPECT_EQ(quantile(d, 0.25), 1.0);
  EXPECT_EQ(quantile(d, 0.2500001), 2.0);
  EXPECT_EQ(quantile(d, 0.5), 2.0);
  EXPECT_EQ(quantile(d, 0.75), 5.0);
}

TEST(Quantile, EmpiricalUsesCeilOrderStatistic) {
  const auto d = DurationDistribution::empirical({4, 1, 3, 2});
  EXPECT_EQ(quantile(d, 0.25), 1.0);
  EXPECT_EQ(quantile(d, 0.26), 2.0);
  EXPECT_EQ(quantile(d, 0.5), 2.0);
  EXPECT_EQ(quantile(d, 0.99), 4.0);
}

TEST(Moments, ClosedForms) {
  const auto u = moments(DurationDistribution::uniform(0, 1));
  EXPECT_DOUBLE_EQ(u.mean, 0.5);
  EXPECT_DOUBLE_EQ(u.variance, 1.0 / 12.0);
  const double target = std::pow(kE, 3) * (kE - 1.0);
  EXPECT_NEAR(moments(DurationDistribution::lognormal(1, 1)).variance, target, 1e-12 * target);
  EXPECT_NEAR(moments(DurationDistribution::lognormal(0.5 * std::log(kE / (kE + 1)), 2)).variance, target,
              1e-12 * target);
}

TEST(Moments, PiecewiseQuadraticAgainstNumericIntegration) {
  const auto m = moments(DurationDistribution::piecewise_quadratic());
  const double mean = oracle::pq_expect([](double x) { return x; });
  const double second = oracle::pq_expect([](double x) { return x * x; });
  EXPECT_NEAR(m.mean, mean, 1e-12);
  EXPECT_NEAR(m.variance, second - mean * mean, 1e-12);
}

TEST(Moments, PiecewiseQuadraticMeanAbsoluteDeviationAboutHalfIsQuarter) {
  EXPECT_NEAR(oracle::pq_expect([](double x) { return std::abs(x - 0.5); }), 0.25, 1e-12);
}

TEST(Moments, DiscreteAndEmpirical) {
  const auto d = moments(DurationDistribution::discrete({{0, 0.5}, {2, 0.5}}));
  EXPECT_DOUBLE_EQ(d.mean, 1.0);
  EXPECT_DOUBLE_EQ(d.variance, 1.0);
  const auto e = moments(DurationDistribution::empirical({1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.variance, 5.0 / 3.0, 1e-15);  // unbiased
}

TEST(Moments, SampleMomentsAgreeWithinFourStandardErrors) {
  const std::size_t m = 1000000;
  for (const auto& d : parametric()) {
    const auto sc = sample_matrix(std::vector{d}, m, 11);
    const auto col = sc.column(0);
    const auto est = mean_and_std_error(col);
    const auto mo = moments(d);
    EXPECT_NEAR(est.mean, mo.mean, 4.0 * est.std_error) << format_distribution(d);
    // Variance of the sample variance from the fourth central moment.
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) sq[i] = (col[i] - est.mean) * (col[i] - est.mean);
    const auto v = mean_and_std_error(sq);
    EXPECT_NEAR(v.mean, mo.variance, 4.0 * v.std_error + 1e-12) << format_distribution(d);
  }
}

TEST(Factories, ValidateParameters) {
  EXPECT_THROW(DurationDistribution::uniform(1, 1), DomainError);
  EXPECT_THROW(DurationDistribution::uniform(-1, 1), DomainError);
  EXPECT_THROW(DurationDistribution::exponential(0), DomainError);
  EXPECT_THROW(DurationDistribution::lognormal(0, 0), DomainError);
  EXPECT_THROW(DurationDistribution::discrete({{1, 0.5}}), DomainError);
  EXPECT_THROW(DurationDistribution::discrete({{-1, 1.0}}), DomainError);
  EXPECT_THROW(DurationDistribution::empirical({}), DomainError);
  EXPECT_THROW(DurationDistribution::empirical({1, -2}), DomainError);
}

TEST(SampleMatrix, DeterministicForSeed) {
  const std::vector jobs{DurationDistribution::exponential(1), DurationDistribution::lognormal(1, 1)};
  EXPECT_EQ(sample_matrix(jobs, 1000, 5), sample_matrix(jobs, 1000, 5));
  EXPECT_FALSE(sample_matrix(jobs, 1000, 5) == sample_matrix(jobs, 1000, 6));
}

TEST(SampleMatrix, UniformColumnMean) {
  const auto sc = sample_matrix(std::vector{DurationDistribution::uniform(0, 1)}, 100000, 1);
  EXPECT_NEAR(sc.column_mean(0), 0.5, 0.01);
}

TEST(SampleMatrix, PointMass) {
  const auto sc = sample_matrix(std::vector{DurationDistribution::point_mass(2.0)}, 3, 99);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(sc.duration(r, 0), 2.0);
}

TEST(SampleMatrix, DurationsAreQuantilesOfStoredUniforms) {
  const std::vector jobs{DurationDistribution::uniform(1, 2), DurationDistribution::exponential(2),
                         DurationDistribution::piecewise_quadratic()};
  const auto sc = sample_matrix(jobs, 500, 3);
  for (std::size_t r = 0; r < sc.rows(); ++r) {
    for (std::size_t c = 0; c < sc.cols(); ++c) {
      EXPECT_GT(sc.uniform(r, c), 0.0);
      EXPECT_LT(sc.uniform(r, c), 1.0);
      EXPECT_EQ(sc.duration(r, c), quantile(jobs[c], sc.uniform(r, c)));
    }
  }
}

TEST(SampleMatrix, DrawsAttachToJobIdentityAndNest) {
  const std::vector jobs{DurationDistribution::uniform(0, 1), DurationDistribution::uniform(0, 1)};
  const auto small = sample_matrix(jobs, 100, 4);
  const auto big = sample_matrix(jobs, 1000, 4);
  for (std::size_t r = 0; r < 100; ++r) {
    EXPECT_EQ(small.uniform(r, 0), big.uniform(r, 0));
    EXPECT_EQ(small.uniform(r, 1), big.uniform(r, 1));
  }
  EXPECT_NE(small.uniform(0, 0), small.uniform(0, 1));
}

TEST(Grammar, ParsesAndFormatsEveryVariant) {
  for (const char* spec : {"uniform(0,1)", "exp(2)", "lognormal(1,1.5)", "ex5x2", "discrete(1:0.25,3:0.75)"}) {
    EXPECT_EQ(format_distribution(parse_distribution(spec)), spec);
  }
  EXPECT_EQ(format_distribution(parse_distribution("  uniform( 0 , 1 ) ")), "uniform(0,1)");
}

TEST(Grammar, ErrorsNameTheOffendingToken) {
  try {
    parse_distribution("uniform(0,abc)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.token(), "abc");
  }
  try {
    parse_distribution("gamma(1,2)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.token(), "gamma");
  }
  EXPECT_THROW(parse_distribution("uniform(1,0)"), ParseError);
  EXPECT_THROW(parse_distribution("exp(1"), ParseError);
  EXPECT_THROW(parse_distribution("discrete(1:0.5)"), ParseError);
}

TEST(Grammar, EmpiricalReadsSampleFile) {
  const std::string path = ::testing::TempDir() + "asp_samples.txt";
  {
    std::ofstream f(path);
    f << "# durations\n3.5\n\n1.0\n2.25\n";
  }
  const auto d = parse_distribution("empirical(" + path + ")");
  EXPECT_DOUBLE_EQ(moments(d).mean, (3.5 + 1.0 + 2.25) / 3.0);
  EXPECT_EQ(format_distribution(d), "empirical(" + path + ")");
  EXPECT_THROW(parse_distribution("empirical(/nonexistent/file)"), ParseError);
}
