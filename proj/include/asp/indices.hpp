#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "asp/cost.hpp"
#include "asp/distributions.hpp"
#include "asp/errors.hpp"
#include "asp/rng.hpp"
#include "asp/summation.hpp"

namespace asp {

enum class IndexMethod { closed_form, sample_based };

// I*_g(X) = inf_{s >= 0} E[g(X - s)] together with the s that attains it.
struct IndexValue {
  double value = 0.0;
  IndexMethod method = IndexMethod::closed_form;
  double std_error = 0.0;
  double minimizing_s = 0.0;
};

namespace detail {

inline double mean_cost_at(const CostFunction& g, std::span<const double> xs, double s, std::vector<double>& buf) {
  for (std::size_t j = 0; j < xs.size(); ++j) buf[j] = g(xs[j] - s);
  return pairwise_sum(buf) / static_cast<double>(xs.size());
}

constexpr double kQuadTol = 1e-10;

template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadTol, &err);
}

}  // namespace detail

// Sample version of I*_g. For every supported g, g is nondecreasing on t >= 0
// and nonincreasing on t <= 0, so the sample objective is nonincreasing for s
// below the smallest sample and nondecreasing above the largest; a minimizer
// therefore lies in [0, max sample] and golden-section search on that convex
// function finds it.
inline IndexValue index_from_samples(const CostFunction& g, std::span<const double> xs) {
  if (xs.empty()) throw DomainError("index: no samples");
  std::vector<double> buf(xs.size());
  double a = 0.0;
  double b = *std::max_element(xs.begin(), xs.end());
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = detail::mean_cost_at(g, xs, c, buf);
  double fd = detail::mean_cost_at(g, xs, d, buf);
  const double stop = 1e-10 * (1.0 + b);
  while (b - a > stop) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = detail::mean_cost_at(g, xs, c, buf);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = detail::mean_cost_at(g, xs, d, buf);
    }
  }
  // Compare the interior point against the bracket ends: the left end can win
  // when the minimum sits at s = 0.
  double s_star = fc <= fd ? c : d;
  for (double cand : {a, b, 0.0}) {
    if (detail::mean_cost_at(g, xs, cand, buf) < detail::mean_cost_at(g, xs, s_star, buf)) s_star = cand;
  }
  for (std::size_t j = 0; j < xs.size(); ++j) buf[j] = g(xs[j] - s_star);
  const auto est = mean_and_std_error(buf);
  return {est.mean, IndexMethod::sample_based, est.std_error, s_star};
}

inline IndexValue index_general(const CostFunction& g, const DurationDistribution& d, std::size_t m,
                                std::uint64_t seed) {
  if (m < 1000) throw DomainError("index_general: need at least 1000 samples");
  std::vector<double> xs(m);
  for (std::size_t r = 0; r < m; ++r) xs[r] = quantile(d, rng::uniform(seed, r, 0));
  return index_from_samples(g, xs);
}

// alpha E[(q - X)^+] + beta E[(X - q)^+] with q the beta/(alpha+beta) quantile.
inline IndexValue index_newsvendor(double alpha, double beta, const DurationDistribution& d) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("index_newsvendor: alpha and beta must be positive");
  const double q = quantile(d, beta / (alpha + beta));
  struct Parts {
    double under;  // E[(q - X)^+]
    double over;   // E[(X - q)^+]
  };
  const Parts p = std::visit(
      detail::overloaded{
          [q](const Uniform& u) {
            const double w = u.hi - u.lo;
            return Parts{(q - u.lo) * (q - u.lo) / (2.0 * w), (u.hi - q) * (u.hi - q) / (2.0 * w)};
          },
          [q](const Exponential& e) {
            const double over = std::exp(-e.rate * q) / e.rate;
            return Parts{q - 1.0 / e.rate + over, over};
          },
          [q](const LogNormal& l) {
            // Integrate over the underlying standard normal z, X = exp(mu + sigma z).
            // The density is folded into one exponent so the tails never form inf * 0;
            // mass beyond 40 standard units of the peak is far below double precision.
            const double sigma = std::sqrt(l.sigma2);
            const double zq = (std::log(q) - l.mu) / sigma;
            const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
            auto x_phi = [&](double z) { return norm * std::exp(l.mu + sigma * z - 0.5 * z * z); };
            auto q_phi = [&](double z) { return norm * q * std::exp(-0.5 * z * z); };
            const double lo = std::min(zq, 0.0) - 40.0;
            const double hi = std::max(zq, sigma) + 40.0;
            const double under = detail::integrate([&](double z) { return q_phi(z) - x_phi(z); }, lo, zq);
            const double over = detail::integrate([&](double z) { return x_phi(z) - q_phi(z); }, zq, hi);
            return Parts{under, over};
          },
          [q, &d](const PiecewiseQuadratic&) {
            // E[(q-X)^+] = int_0^q F, E[(X-q)^+] = int_q^1 (1-F); F has a kink at 1/2.
            auto F = [&d](double x) { return cdf(d, x); };
            auto S = [&d](double x) { return 1.0 - cdf(d, x); };
            auto piece = [](auto f, double a, double b) {
              if (a >= b) return 0.0;
              if (a < 0.5 && b > 0.5) return detail::integrate(f, a, 0.5) + detail::integrate(f, 0.5, b);
              return detail::integrate(f, a, b);
            };
            return Parts{piece(F, 0.0, q), piece(S, q, 1.0)};
          },
          [q](const Discrete& dd) {
            Parts out{0.0, 0.0};
            for (const auto& a : dd.atoms) {
              out.under += a.prob * std::max(q - a.value, 0.0);
              out.over += a.prob * std::max(a.value - q, 0.0);
            }
            return out;
          },
          [q](const Empirical& e) {
            std::vector<double> under(e.sorted->size()), over(e.sorted->size());
            for (std::size_t j = 0; j < e.sorted->size(); ++j) {
              under[j] = std::max(q - (*e.sorted)[j], 0.0);
              over[j] = std::max((*e.sorted)[j] - q, 0.0);
            }
            const double n = static_cast<double>(e.sorted->size());
            return Parts{pairwise_sum(under) / n, pairwise_sum(over) / n};
          },
      },
      d.variant());
  return {std::max(0.0, alpha * p.under + beta * p.over), IndexMethod::closed_form, 0.0, q};
}

inline IndexValue index_variance(const DurationDistribution& d) {
  const auto mo = moments(d);
  return {mo.variance, IndexMethod::closed_form, 0.0, mo.mean};
}

// The index used to order jobs under g: newsvendor for l1, variance for l2,
// sample I*_g for the tolerance cost.
inline IndexValue sequencing_index(const CostFunction& g, const DurationDistribution& d, std::size_t m,
                                   std::uint64_t seed) {
  return std::visit(detail::overloaded{
                        [&](const L1Cost& c) { return index_newsvendor(c.alpha, c.beta, d); },
                        [&](const L2Cost&) { return index_variance(d); },
                        [&](const ToleranceCost&) { return index_general(g, d, m, seed); },
                    },
                    g.variant());
}

}  // namespace asp
