#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "asp/errors.hpp"
#include "asp/scenarios.hpp"
#include "asp/summation.hpp"
#include "asp/text.hpp"

namespace asp {

// Penalty g(t) applied to t = E_{i-1} - s_i: positive t is delay, negative t is idle time.
// All variants are convex, nonnegative, coercive and satisfy g(0) = 0.

// beta * t^+ + alpha * (-t)^+
struct L1Cost {
  double alpha;  // idle cost rate
  double beta;   // delay cost rate

  double value(double t) const noexcept { return std::max(beta * t, -alpha * t); }
  // Subgradient element; 0 at the kink.
  double slope(double t) const noexcept {
    return static_cast<double>(t > 0.0) * beta - static_cast<double>(t < 0.0) * alpha;
  }
  // Antiderivative vanishing at 0.
  double integral(double t) const noexcept { return 0.5 * (t > 0.0 ? beta : alpha) * t * t; }
};

struct L2Cost {
  double value(double t) const noexcept { return t * t; }
  double slope(double t) const noexcept { return 2.0 * t; }
  double integral(double t) const noexcept { return t * t * t / 3.0; }
};

// Zero inside the band [-idle_tolerance, delay_tolerance], linear outside it.
struct ToleranceCost {
  double alpha;
  double beta;
  double delay_tolerance;
  double idle_tolerance;

  double value(double t) const noexcept {
    if (t >= delay_tolerance) return beta * (t - delay_tolerance);
    if (t <= -idle_tolerance) return -alpha * (t + idle_tolerance);
    return 0.0;
  }
  // The flat-side value 0 is used at both kinks.
  double slope(double t) const noexcept {
    if (t > delay_tolerance) return beta;
    if (t < -idle_tolerance) return -alpha;
    return 0.0;
  }
  double integral(double t) const noexcept {
    if (t > delay_tolerance) return 0.5 * beta * (t - delay_tolerance) * (t - delay_tolerance);
    if (t < -idle_tolerance) return -0.5 * alpha * (t + idle_tolerance) * (t + idle_tolerance);
    return 0.0;
  }
};

// Average of g over [t - width, t + width]. Continuously differentiable for the
// piecewise-linear variants; the solver uses it only to find a starting point.
template <class G>
struct Smoothed {
  G g;
  double width;

  double value(double t) const noexcept { return (g.integral(t + width) - g.integral(t - width)) / (2.0 * width); }
  double slope(double t) const noexcept { return (g.value(t + width) - g.value(t - width)) / (2.0 * width); }
};

class CostFunction {
 public:
  using Variant = std::variant<L1Cost, L2Cost, ToleranceCost>;

  static CostFunction l1(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
      throw DomainError("l1 cost: alpha and beta must be positive");
    }
    return CostFunction(L1Cost{alpha, beta});
  }

  static CostFunction l2() { return CostFunction(L2Cost{}); }

  static CostFunction tolerance(double alpha, double beta, double delay_tolerance, double idle_tolerance) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
      throw DomainError("tolerance cost: alpha and beta must be positive");
    }
    if (!(delay_tolerance >= 0.0) || !(idle_tolerance >= 0.0) || !std::isfinite(delay_tolerance) ||
        !std::isfinite(idle_tolerance)) {
      throw DomainError("tolerance cost: tolerances must be finite and >= 0");
    }
    return CostFunction(ToleranceCost{alpha, beta, delay_tolerance, idle_tolerance});
  }

  const Variant& variant() const noexcept { return v_; }

  bool is_smooth() const noexcept { return std::holds_alternative<L2Cost>(v_); }

  double operator()(double t) const {
    return std::visit([t](const auto& g) { return g.value(t); }, v_);
  }
  double slope(double t) const {
    return std::visit([t](const auto& g) { return g.slope(t); }, v_);
  }

 private:
  explicit CostFunction(Variant v) : v_(v) {}
  Variant v_;
};

// l1(alpha,beta) | l2 | tol(alpha,beta,Td,Ti)
inline CostFunction parse_cost(std::string_view spec) {
  const auto call = text::parse_call(spec);
  const std::string whole(text::trim(spec));
  auto expect_args = [&](std::size_t n) {
    if (call.args.size() != n) {
      throw ParseError("'" + std::string(call.name) + "' takes " + std::to_string(n) + " argument(s)", whole);
    }
  };
  try {
    if (call.name == "l1") {
      expect_args(2);
      return CostFunction::l1(text::parse_double(call.args[0]), text::parse_double(call.args[1]));
    }
    if (call.name == "l2") {
      if (call.has_parens && !call.args.empty()) throw ParseError("'l2' takes no arguments", whole);
      return CostFunction::l2();
    }
    if (call.name == "tol") {
      expect_args(4);
      return CostFunction::tolerance(text::parse_double(call.args[0]), text::parse_double(call.args[1]),
                                     text::parse_double(call.args[2]), text::parse_double(call.args[3]));
    }
  } catch (const DomainError& e) {
    throw ParseError(e.what(), whole);
  }
  throw ParseError("unknown cost '" + std::string(call.name) + "'", std::string(call.name));
}

inline std::string format_cost(const CostFunction& g) {
  using text::format_double;
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, L1Cost>) {
          return "l1(" + format_double(c.alpha) + "," + format_double(c.beta) + ")";
        } else if constexpr (std::is_same_v<T, L2Cost>) {
          return "l2";
        } else {
          return "tol(" + format_double(c.alpha) + "," + format_double(c.beta) + "," +
                 format_double(c.delay_tolerance) + "," + format_double(c.idle_tolerance) + ")";
        }
      },
      g.variant());
}

// Appointment times s_2 <= ... <= s_n with s_2 >= 0 (s_1 = 0 is implicit),
// stored as nonnegative gaps d = (s_2, s_3 - s_2, ..., s_n - s_{n-1}).
class Schedule {
 public:
  Schedule() = default;

  static Schedule from_times(std::span<const double> times) {
    std::vector<double> gaps(times.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!std::isfinite(times[k]) || times[k] < prev) {
        throw DomainError("schedule: appointment times must satisfy 0 <= s_2 <= ... <= s_n");
      }
      gaps[k] = times[k] - prev;
      prev = times[k];
    }
    Schedule s;
    s.gaps_ = std::move(gaps);
    s.times_.assign(times.begin(), times.end());
    return s;
  }

  static Schedule from_gaps(std::span<const double> gaps) {
    Schedule s;
    s.gaps_.assign(gaps.begin(), gaps.end());
    s.times_.resize(gaps.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      if (!(gaps[k] >= 0.0) || !std::isfinite(gaps[k])) throw DomainError("schedule: gaps must be finite and >= 0");
      acc += gaps[k];
      s.times_[k] = acc;
    }
    return s;
  }

  // Number of appointment times, n - 1.
  std::size_t size() const noexcept { return gaps_.size(); }
  std::size_t job_count() const noexcept { return gaps_.size() + 1; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> gaps() const noexcept { return gaps_; }

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<double> gaps_;
  std::vector<double> times_;
};

namespace detail {

// Cost of one scenario under the end-time recursion E_1 = x_1,
// E_i = max(E_{i-1}, s_i) + x_i. When `grad` is non-null, adds d/ds of the cost
// to it (grad[k] belongs to s_{k+2}). dE_{i-1}/ds_k is 1 exactly when appointment k
// opened the busy period job i-1 belongs to; ties E_{i-1} = s_i open a new one.
template <class G>
inline double scenario_cost(const G& g, const double* times, const double* x, const std::size_t* order,
                            std::size_t n, double* grad) {
  double end = x[order[0]];
  std::ptrdiff_t opener = -1;  // -1: the busy period started at s_1 = 0, which is fixed
  double total = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double s = times[i - 1];
    const double t = end - s;
    total += g.value(t);
    if (grad != nullptr) {
      const double slope = g.slope(t);
      if (opener >= 0) grad[opener] += slope;
      grad[i - 1] -= slope;
    }
    if (end <= s) {
      end = s;
      opener = static_cast<std::ptrdiff_t>(i - 1);
    }
    end += x[order[i]];
  }
  return total;
}

inline void check_pathwise(const Schedule& s, std::span<const double> x) {
  if (x.size() != s.size() + 1) {
    throw DimensionError("schedule has " + std::to_string(s.size()) + " appointments but " +
                         std::to_string(x.size()) + " durations were given");
  }
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("durations must be finite and >= 0");
  }
}

inline void check_order(std::span<const std::size_t> order, std::size_t cols) {
  if (order.size() != cols) throw DimensionError("job order length does not match scenario width");
  std::vector<bool> seen(cols, false);
  for (auto c : order) {
    if (c >= cols || seen[c]) throw DomainError("job order is not a permutation");
    seen[c] = true;
  }
}

}  // namespace detail

inline std::vector<double> end_times(const Schedule& s, std::span<const double> x) {
  detail::check_pathwise(s, x);
  std::vector<double> e(x.size());
  e[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) e[i] = std::max(e[i - 1], s.times()[i - 1]) + x[i];
  return e;
}

inline double pathwise_cost(const CostFunction& g, const Schedule& s, std::span<const double> x) {
  detail::check_pathwise(s, x);
  const auto order = identity_order(x.size());
  return std::visit(
      [&](const auto& c) { return detail::scenario_cost(c, s.times().data(), x.data(), order.data(), x.size(), nullptr); },
      g.variant());
}

// One element of the subdifferential of C(., x) at s, in appointment-time coordinates.
inline std::vector<double> pathwise_subgradient(const CostFunction& g, const Schedule& s, std::span<const double> x) {
  detail::check_pathwise(s, x);
  const auto order = identity_order(x.size());
  std::vector<double> grad(s.size(), 0.0);
  std::visit(
      [&](const auto& c) {
        detail::scenario_cost(c, s.times().data(), x.data(), order.data(), x.size(), grad.data());
      },
      g.variant());
  return grad;
}

// Sample-average objective C_m over the first `rows` scenarios of a set, with
// jobs taken in `order`. Means and gradients are reduced over a fixed pairwise
// tree, so results are bit-stable for a given scenario count.
class SampleObjective {
 public:
  SampleObjective(const CostFunction& g, const ScenarioSet& sc, std::span<const std::size_t> order)
      : SampleObjective(g, sc, order, sc.rows()) {}

  // A positive `smoothing` replaces g by its average over a window of that
  // half-width (see Smoothed).
  SampleObjective(const CostFunction& g, const ScenarioSet& sc, std::span<const std::size_t> order, std::size_t rows,
                  double smoothing = 0.0)
      : g_(g), sc_(&sc), order_(order.begin(), order.end()), rows_(rows), smoothing_(smoothing) {
    detail::check_order(order, sc.cols());
    if (rows_ == 0 || rows_ > sc.rows()) throw DomainError("sample objective: row count out of range");
    if (sc.cols() < 2) throw DomainError("sample objective: need at least two jobs");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t jobs() const noexcept { return order_.size(); }
  std::size_t dim() const noexcept { return order_.size() - 1; }
  const CostFunction& cost() const noexcept { return g_; }
  std::span<const std::size_t> order() const noexcept { return order_; }

  double value(std::span<const double> times) const {
    check_times(times);
    return dispatch([&](const auto& c) { return reduce(c, times.data(), 0, rows_, 0, nullptr); }) /
           static_cast<double>(rows_);
  }

  // Mean cost; fills `grad` (appointment-time coordinates) with the mean subgradient.
  double value_and_gradient(std::span<const double> times, std::span<double> grad) const {
    check_times(times);
    if (grad.size() != dim()) throw DimensionError("gradient buffer has the wrong size");
    if (scratch_.size() < 64) scratch_.assign(64, std::vector<double>(dim() + 1, 0.0));
    grad_ext_.resize(dim() + 1);
    const double total = dispatch([&](const auto& c) { return reduce(c, times.data(), 0, rows_, 0, grad_ext_.data()); });
    const double inv = 1.0 / static_cast<double>(rows_);
    for (std::size_t k = 0; k < dim(); ++k) grad[k] = grad_ext_[k + 1] * inv;
    return total * inv;
  }

  std::vector<double> scenario_costs(std::span<const double> times) const {
    check_times(times);
    std::vector<double> out(rows_);
    dispatch([&](const auto& c) {
      for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = detail::scenario_cost(c, times.data(), sc_->row(r).data(), order_.data(), order_.size(), nullptr);
      }
      return 0.0;
    });
    return out;
  }

 private:
  static constexpr std::size_t kLeaf = 256;

  template <class F>
  double dispatch(F f) const {
    return std::visit(
        [&](const auto& c) {
          if (smoothing_ > 0.0) return f(Smoothed<std::decay_t<decltype(c)>>{c, smoothing_});
          return f(c);
        },
        g_.variant());
  }

  void check_times(std::span<const double> times) const {
    if (times.size() != dim()) throw DimensionError("schedule length does not match scenario width - 1");
  }

  // Leaves accumulate into a buffer of dim()+1 slots (slot 0 is the fixed s_1).
  template <class G>
  double reduce(const G& g, const double* times, std::size_t lo, std::size_t hi, std::size_t depth,
                double* grad) const {
    if (hi - lo <= kLeaf) {
      if (grad != nullptr) {
        std::fill(grad, grad + dim() + 1, 0.0);
        double acc = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
          acc += detail::scenario_cost(g, times, sc_->row(r).data(), order_.data(), order_.size(), grad + 1);
        }
        return acc;
      }
      double acc = 0.0;
      for (std::size_t r = lo; r < hi; ++r) {
        acc += detail::scenario_cost(g, times, sc_->row(r).data(), order_.data(), order_.size(), nullptr);
      }
      return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const double left = reduce(g, times, lo, mid, depth + 1, grad);
    double* right_grad = grad != nullptr ? scratch_[depth].data() : nullptr;
    const double right = reduce(g, times, mid, hi, depth + 1, right_grad);
    if (grad != nullptr) {
      for (std::size_t k = 0; k <= dim(); ++k) grad[k] += right_grad[k];
    }
    return left + right;
  }

  CostFunction g_;
  const ScenarioSet* sc_;
  std::vector<std::size_t> order_;
  std::size_t rows_;
  double smoothing_;
  mutable std::vector<std::vector<double>> scratch_;
  mutable std::vector<double> grad_ext_;
};

struct CostEstimate {
  double value;
  double std_error;
};

inline CostEstimate saa_objective(const CostFunction& g, const Schedule& s, const ScenarioSet& sc,
                                  std::span<const std::size_t> order) {
  if (sc.rows() == 0) throw DomainError("saa_objective: empty scenario set");
  if (s.size() + 1 != sc.cols()) throw DimensionError("saa_objective: schedule length does not match scenario width");
  const SampleObjective obj(g, sc, order);
  const auto costs = obj.scenario_costs(s.times());
  const auto est = mean_and_std_error(costs);
  return {est.mean, est.std_error};
}

inline CostEstimate saa_objective(const CostFunction& g, const Schedule& s, const ScenarioSet& sc) {
  const auto order = identity_order(sc.cols());
  return saa_objective(g, s, sc, order);
}

}  // namespace asp
