#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "asp/errors.hpp"
#include "asp/summation.hpp"
#include "asp/text.hpp"

namespace asp {

// Job-duration models. Every variant is supported on [0, inf) and is sampled
// by inverse CDF, so a uniform draw fully determines a duration.

struct Uniform {
  double lo;
  double hi;
};

struct Exponential {
  double rate;
};

// Parameterized by the mean and variance of the underlying normal.
struct LogNormal {
  double mu;
  double sigma2;
};

// F(x) = 2x^2 on (0, 1/2), 2(x - 1/2)^2 + 1/2 on [1/2, 1).
struct PiecewiseQuadratic {};

struct Atom {
  double value;
  double prob;
};

// Atoms sorted by value, probabilities sum to one.
struct Discrete {
  std::vector<Atom> atoms;
};

struct Empirical {
  std::shared_ptr<const std::vector<double>> sorted;  // ascending, nonempty
  std::string source;                                 // file path, kept for round-tripping
};

struct Moments {
  double mean;
  double variance;
};

class DurationDistribution {
 public:
  using Variant = std::variant<Uniform, Exponential, LogNormal, PiecewiseQuadratic, Discrete, Empirical>;

  static DurationDistribution uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
      throw DomainError("uniform: need 0 <= lo < hi < inf");
    }
    return DurationDistribution(Uniform{lo, hi});
  }

  static DurationDistribution exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential: rate must be positive");
    return DurationDistribution(Exponential{rate});
  }

  static DurationDistribution lognormal(double mu, double sigma2) {
    if (!std::isfinite(mu) || !(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw DomainError("lognormal: need finite mu and sigma2 > 0");
    }
    return DurationDistribution(LogNormal{mu, sigma2});
  }

  static DurationDistribution piecewise_quadratic() { return DurationDistribution(PiecewiseQuadratic{}); }

  static DurationDistribution discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw DomainError("discrete: no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.value >= 0.0) || !std::isfinite(a.value)) throw DomainError("discrete: values must be >= 0");
      if (!(a.prob > 0.0 && a.prob <= 1.0)) throw DomainError("discrete: probabilities must lie in (0,1]");
      total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("discrete: probabilities must sum to 1");
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    return DurationDistribution(Discrete{std::move(atoms)});
  }

  static DurationDistribution point_mass(double value) { return discrete({{value, 1.0}}); }

  static DurationDistribution empirical(std::vector<double> samples, std::string source = {}) {
    if (samples.empty()) throw DomainError("empirical: no samples");
    for (double x : samples) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("empirical: samples must be finite and >= 0");
    }
    std::sort(samples.begin(), samples.end());
    return DurationDistribution(
        Empirical{std::make_shared<const std::vector<double>>(std::move(samples)), std::move(source)});
  }

  const Variant& variant() const noexcept { return v_; }

  // Variants with closed-form quantile, CDF and moments.
  bool is_parametric() const noexcept {
    return !std::holds_alternative<Discrete>(v_) && !std::holds_alternative<Empirical>(v_);
  }

 private:
  explicit DurationDistribution(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

namespace detail {

inline double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

// inf{x : F(x) >= p}.
inline double quantile(const DurationDistribution& d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
  return std::visit(
      detail::overloaded{
          [p](const Uniform& u) { return u.lo + p * (u.hi - u.lo); },
          [p](const Exponential& e) { return -std::log1p(-p) / e.rate; },
          [p](const LogNormal& l) { return std::exp(l.mu + std::sqrt(l.sigma2) * detail::normal_quantile(p)); },
          [p](const PiecewiseQuadratic&) {
            return p < 0.5 ? std::sqrt(0.5 * p) : 0.5 + std::sqrt(0.5 * (p - 0.5));
          },
          [p](const Discrete& d) {
            double cum = 0.0;
            for (const auto& a : d.atoms) {
              cum += a.prob;
              if (cum >= p) return a.value;
            }
            return d.atoms.back().value;
          },
          [p](const Empirical& e) {
            const auto& s = *e.sorted;
            // Order statistic ceil(p N), 1-based.
            auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(s.size())));
            k = std::clamp<std::size_t>(k, 1, s.size());
            return s[k - 1];
          },
      },
      d.variant());
}

inline double cdf(const DurationDistribution& d, double x) {
  return std::visit(
      detail::overloaded{
          [x](const Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
          [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
          [x](const LogNormal& l) {
            return x <= 0.0 ? 0.0 : detail::normal_cdf((std::log(x) - l.mu) / std::sqrt(l.sigma2));
          },
          [x](const PiecewiseQuadratic&) {
            if (x <= 0.0) return 0.0;
            if (x < 0.5) return 2.0 * x * x;
            if (x < 1.0) return 2.0 * (x - 0.5) * (x - 0.5) + 0.5;
            return 1.0;
          },
          [x](const Discrete& d) {
            double cum = 0.0;
            for (const auto& a : d.atoms) {
              if (a.value > x) break;
              cum += a.prob;
            }
            return std::min(cum, 1.0);
          },
          [x](const Empirical& e) {
            const auto& s = *e.sorted;
            const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
            return static_cast<double>(count) / static_cast<double>(s.size());
          },
      },
      d.variant());
}

inline Moments moments(const DurationDistribution& d) {
  return std::visit(
      detail::overloaded{
          [](const Uniform& u) {
            const double w = u.hi - u.lo;
            return Moments{0.5 * (u.lo + u.hi), w * w / 12.0};
          },
          [](const Exponential& e) { return Moments{1.0 / e.rate, 1.0 / (e.rate * e.rate)}; },
          [](const LogNormal& l) {
            return Moments{std::exp(l.mu + 0.5 * l.sigma2), std::expm1(l.sigma2) * std::exp(2.0 * l.mu + l.sigma2)};
          },
          // E[X] = 7/12, E[X^2] = 5/12.
          [](const PiecewiseQuadratic&) { return Moments{7.0 / 12.0, 11.0 / 144.0}; },
          [](const Discrete& d) {
            double mean = 0.0;
            for (const auto& a : d.atoms) mean += a.prob * a.value;
            double var = 0.0;
            for (const auto& a : d.atoms) var += a.prob * (a.value - mean) * (a.value - mean);
            return Moments{mean, var};
          },
          [](const Empirical& e) {
            const auto est = mean_and_std_error(*e.sorted);
            const double n = static_cast<double>(e.sorted->size());
            // Unbiased sample variance recovered from the standard error.
            return Moments{est.mean, est.std_error * est.std_error * n};
          },
      },
      d.variant());
}

// Newline-delimited nonnegative decimals; blank lines and '#' comments are skipped.
inline std::vector<double> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sample file", path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(text::parse_double(t));
  }
  if (out.empty()) throw ParseError("sample file has no values", path);
  return out;
}

// uniform(lo,hi) | exp(rate) | lognormal(mu,sigma2) | ex5x2 | discrete(v1:p1,...) | empirical(path)
inline DurationDistribution parse_distribution(std::string_view spec) {
  const auto call = text::parse_call(spec);
  const std::string whole(text::trim(spec));
  auto expect_args = [&](std::size_t n) {
    if (call.args.size() != n) {
      throw ParseError("'" + std::string(call.name) + "' takes " + std::to_string(n) + " argument(s)", whole);
    }
  };
  try {
    if (call.name == "uniform") {
      expect_args(2);
      return DurationDistribution::uniform(text::parse_double(call.args[0]), text::parse_double(call.args[1]));
    }
    if (call.name == "exp") {
      expect_args(1);
      return DurationDistribution::exponential(text::parse_double(call.args[0]));
    }
    if (call.name == "lognormal") {
      expect_args(2);
      return DurationDistribution::lognormal(text::parse_double(call.args[0]), text::parse_double(call.args[1]));
    }
    if (call.name == "ex5x2") {
      if (call.has_parens && !call.args.empty()) throw ParseError("'ex5x2' takes no arguments", whole);
      return DurationDistribution::piecewise_quadratic();
    }
    if (call.name == "discrete") {
      if (call.args.empty()) throw ParseError("'discrete' needs at least one value:prob pair", whole);
      std::vector<Atom> atoms;
      for (auto arg : call.args) {
        const auto colon = arg.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected value:prob", std::string(arg));
        atoms.push_back({text::parse_double(arg.substr(0, colon)), text::parse_double(arg.substr(colon + 1))});
      }
      return DurationDistribution::discrete(std::move(atoms));
    }
    if (call.name == "empirical") {
      if (!call.has_parens || call.args.empty()) throw ParseError("'empirical' needs a file path", whole);
      // Paths may contain commas; rejoin whatever sits between the parentheses.
      const auto open = whole.find('(');
      std::string path(text::trim(std::string_view(whole).substr(open + 1, whole.size() - open - 2)));
      return DurationDistribution::empirical(load_samples(path), path);
    }
  } catch (const DomainError& e) {
    throw ParseError(e.what(), whole);
  }
  throw ParseError("unknown distribution '" + std::string(call.name) + "'", std::string(call.name));
}

inline std::string format_distribution(const DurationDistribution& d) {
  using text::format_double;
  return std::visit(
      detail::overloaded{
          [](const Uniform& u) { return "uniform(" + format_double(u.lo) + "," + format_double(u.hi) + ")"; },
          [](const Exponential& e) { return "exp(" + format_double(e.rate) + ")"; },
          [](const LogNormal& l) { return "lognormal(" + format_double(l.mu) + "," + format_double(l.sigma2) + ")"; },
          [](const PiecewiseQuadratic&) { return std::string("ex5x2"); },
          [](const Discrete& d) {
            std::string out = "discrete(";
            for (std::size_t i = 0; i < d.atoms.size(); ++i) {
              if (i) out += ",";
              out += format_double(d.atoms[i].value) + ":" + format_double(d.atoms[i].prob);
            }
            return out + ")";
          },
          [](const Empirical& e) { return "empirical(" + e.source + ")"; },
      },
      d.variant());
}

}  // namespace asp
