#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "asp/cost.hpp"
#include "asp/distributions.hpp"
#include "asp/errors.hpp"
#include "asp/rng.hpp"
#include "asp/scenarios.hpp"
#include "asp/summation.hpp"

namespace asp {

struct SolverOptions {
  double tol = 1e-6;            // relative, on the objective
  std::size_t max_iters = 5000;  // per refinement level
  bool trace = false;
  // Solve on nested row prefixes (m/100, m/10, ...) before the full sample.
  bool warm_start = true;
};

struct TracePoint {
  std::size_t iteration;
  double objective;
};

struct SolveResult {
  Schedule schedule;
  double value = 0.0;      // C_m at `schedule`
  double std_error = 0.0;  // of the scenario-cost mean at `schedule`
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

namespace detail {

// C_m as a function of the gaps d >= 0; the gradient w.r.t. d_k is the suffix
// sum of the appointment-time gradient from k on.
class GapObjective {
 public:
  explicit GapObjective(const SampleObjective& obj) : obj_(obj), times_(obj.dim()), grad_s_(obj.dim()) {}

  std::size_t dim() const noexcept { return obj_.dim(); }

  double eval(std::span<const double> gaps, std::span<double> grad) {
    ++evaluations;
    double acc = 0.0;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      acc += gaps[k];
      times_[k] = acc;
    }
    const double f = obj_.value_and_gradient(times_, grad_s_);
    double suffix = 0.0;
    for (std::size_t k = gaps.size(); k-- > 0;) {
      suffix += grad_s_[k];
      grad[k] = suffix;
    }
    return f;
  }

  double value_at_times(std::span<const double> times) {
    ++evaluations;
    return obj_.value(times);
  }

  std::size_t evaluations = 0;

 private:
  const SampleObjective& obj_;
  std::vector<double> times_;
  std::vector<double> grad_s_;
};

struct PhaseResult {
  std::vector<double> gaps;
  double value;
  std::size_t iterations;
  bool converged;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// Gradient with the components that point out of the box d >= 0 removed.
inline double projected_gradient_norm(std::span<const double> d, std::span<const double> g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double c = (d[k] <= 0.0 && g[k] > 0.0) ? 0.0 : g[k];
    acc += c * c;
  }
  return std::sqrt(acc);
}

inline void record(std::vector<TracePoint>* trace, std::size_t it, double f) {
  if (trace != nullptr) trace->push_back({it, f});
}

// Coordinate probe: tries s_k +- step for every appointment (staying inside
// the ordered cone) and returns the best gaps found with their value, or
// nothing when no probe beats `f` by more than `margin`.
inline std::optional<std::pair<std::vector<double>, double>> probe_coordinates(GapObjective& obj,
                                                                               std::span<const double> d, double f,
                                                                               double step, double margin) {
  std::vector<double> t(d.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) t[k] = acc += d[k];
  std::optional<std::pair<std::vector<double>, double>> best;
  double best_f = f - margin;
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      auto probe = t;
      probe[k] += sign * step;
      const double lo = k == 0 ? 0.0 : probe[k - 1];
      const double hi = k + 1 < probe.size() ? probe[k + 1] : std::numeric_limits<double>::infinity();
      if (probe[k] < lo || probe[k] > hi) continue;
      const double fp = obj.value_at_times(probe);
      if (fp < best_f) {
        best_f = fp;
        std::vector<double> gaps(probe.size());
        double prev = 0.0;
        for (std::size_t j = 0; j < probe.size(); ++j) {
          gaps[j] = std::max(0.0, probe[j] - prev);
          prev = probe[j];
        }
        best = std::make_pair(std::move(gaps), fp);
      }
    }
  }
  return best;
}

// Projected subgradient method with Polyak steps toward the target
// f_best - delta. After 50 iterations without an improvement of f_best beyond
// the tolerance, a coordinate probe of size `probe_step` is run at the best
// point: if it finds nothing the run has converged, otherwise it continues from
// the probe's point. After 100 such iterations delta is halved and the iterate
// is reset to the best point (after trying the running average). A delta below
// tol * (1 + f_best) also ends the run.
inline PhaseResult polyak_descent(GapObjective& obj, std::vector<double> d, double tol, std::size_t max_iters,
                                  double delta, double probe_step, std::vector<TracePoint>* trace,
                                  std::size_t iter_offset) {
  constexpr std::size_t kProbeAfter = 50;
  constexpr std::size_t kStallLimit = 100;
  const std::size_t n = obj.dim();
  std::vector<double> g(n), g_probe(n), avg(d);
  double f = obj.eval(d, g);
  std::vector<double> best_d = d;
  double best_f = f;
  double anchor_f = f;
  std::size_t avg_count = 1;
  std::size_t stall = 0;
  record(trace, iter_offset, f);

  auto threshold = [&] { return tol * (1.0 + std::abs(best_f)); };
  if (best_f <= 0.0) return {best_d, best_f, 0, true};
  delta = delta > 0.0 ? delta * (1.0 + best_f) : 0.1 * (1.0 + best_f);

  std::size_t it = 0;
  bool converged = false;
  while (it < max_iters) {
    if (projected_gradient_norm(d, g) == 0.0) {
      // 0 lies in g + normal cone: d is optimal.
      if (f < best_f) {
        best_f = f;
        best_d = d;
      }
      converged = true;
      break;
    }
    const double gn2 = dot(g, g);
    const double step = (f - (best_f - delta)) / gn2;
    for (std::size_t k = 0; k < n; ++k) d[k] = std::max(0.0, d[k] - step * g[k]);
    f = obj.eval(d, g);
    ++it;
    record(trace, iter_offset + it, f);

    ++avg_count;
    for (std::size_t k = 0; k < n; ++k) avg[k] += (d[k] - avg[k]) / static_cast<double>(avg_count);

    if (f < best_f) {
      best_f = f;
      best_d = d;
    }
    if (best_f < anchor_f - threshold()) {
      anchor_f = best_f;
      stall = 0;
    } else {
      ++stall;
    }
    if (best_f <= 0.0) {
      converged = true;
      break;
    }
    if (stall == kProbeAfter && probe_step > 0.0) {
      auto better = probe_coordinates(obj, best_d, best_f, probe_step, threshold());
      if (!better) {
        converged = true;
        break;
      }
      best_d = std::move(better->first);
      best_f = better->second;
      anchor_f = best_f;
      stall = 0;
      d = best_d;
      f = obj.eval(d, g);
      continue;
    }
    if (stall >= kStallLimit) {
      const double fa = obj.eval(avg, g_probe);
      if (fa < best_f) {
        best_f = fa;
        best_d = avg;
      }
      delta *= 0.5;
      stall = 0;
      anchor_f = best_f;
      d = best_d;
      f = obj.eval(d, g);
      avg = d;
      avg_count = 1;
      if (delta <= threshold()) {
        converged = true;
        break;
      }
    }
  }
  return {best_d, best_f, it, converged};
}

// Projected BFGS on the box d >= 0: coordinates held at the bound with an
// outward gradient are frozen, the rest take a quasi-Newton step, and an
// Armijo backtracking search runs along the projection arc.
inline PhaseResult projected_bfgs(GapObjective& obj, std::vector<double> d, double tol, std::size_t max_iters,
                                  std::vector<TracePoint>* trace, std::size_t iter_offset, bool* stalled) {
  const std::size_t n = obj.dim();
  std::vector<double> g(n), g_new(n), p(n), d_new(n), s(n), y(n);
  std::vector<double> h(n * n, 0.0);  // inverse Hessian approximation, row-major
  auto reset_h = [&](double scale) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) h[k * n + k] = scale;
  };
  double f = obj.eval(d, g);
  record(trace, iter_offset, f);
  const double gnorm0 = std::sqrt(dot(g, g));
  double typical = 1.0;
  for (double v : d) typical = std::max(typical, v);
  reset_h(gnorm0 > 0.0 ? typical / gnorm0 : 1.0);
  bool fresh_h = true;
  *stalled = false;
  // Gradient jumps at busy-period kinks can keep the gradient test from ever
  // passing; a window of steps with no real progress counts as a stall.
  constexpr std::size_t kWindow = 20;
  std::vector<double> recent;

  std::size_t it = 0;
  while (it < max_iters) {
    if (projected_gradient_norm(d, g) <= tol * (1.0 + std::abs(f))) return {d, f, it, true};
    if (recent.size() == kWindow && recent.front() - f <= 1e-2 * tol * (1.0 + std::abs(f))) {
      *stalled = true;
      return {d, f, it, false};
    }

    std::vector<bool> frozen(n);
    for (std::size_t k = 0; k < n; ++k) frozen[k] = d[k] <= 0.0 && g[k] > 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      if (!frozen[i]) {
        for (std::size_t j = 0; j < n; ++j) {
          if (!frozen[j]) acc -= h[i * n + j] * g[j];
        }
      }
      p[i] = acc;
    }
    if (dot(p, g) >= 0.0) {
      reset_h(h[0] > 0.0 ? h[0] : 1.0);
      fresh_h = true;
      for (std::size_t k = 0; k < n; ++k) p[k] = frozen[k] ? 0.0 : -g[k] * h[k * n + k];
    }

    double t = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t k = 0; k < n; ++k) d_new[k] = std::max(0.0, d[k] + t * p[k]);
      for (std::size_t k = 0; k < n; ++k) s[k] = d_new[k] - d[k];
      const double decrease = dot(g, s);
      if (decrease >= 0.0) {
        t *= 0.5;
        continue;
      }
      f_new = obj.eval(d_new, g_new);
      if (f_new <= f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!fresh_h) {
        reset_h(h[0] > 0.0 ? h[0] : 1.0);
        fresh_h = true;
        continue;
      }
      *stalled = true;
      return {d, f, it, false};
    }

    for (std::size_t k = 0; k < n; ++k) y[k] = g_new[k] - g[k];
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (fresh_h) reset_h(sy / dot(y, y));
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / sy;
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) hy[i] += h[i * n + j] * y[j];
      }
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
      }
      fresh_h = false;
    }
    d = d_new;
    g = g_new;
    f = f_new;
    ++it;
    record(trace, iter_offset + it, f);
    recent.push_back(f);
    if (recent.size() > kWindow) recent.erase(recent.begin());
  }
  return {d, f, it, false};
}

inline PhaseResult solve_level(GapObjective& obj, std::vector<double> d, bool smooth, double tol,
                               std::size_t max_iters, double delta0, double probe_step,
                               std::vector<TracePoint>* trace, std::size_t iter_offset) {
  if (smooth) {
    bool stalled = false;
    auto res = projected_bfgs(obj, std::move(d), tol, max_iters, trace, iter_offset, &stalled);
    if (res.converged || !stalled || res.iterations >= max_iters) return res;
    // Line search stalled at a kink of the sample objective: finish with the
    // nonsmooth method from where quasi-Newton stopped.
    auto polish = polyak_descent(obj, res.gaps, tol, max_iters - res.iterations, 1e-3, probe_step, trace,
                                 iter_offset + res.iterations);
    polish.iterations += res.iterations;
    return polish;
  }
  return polyak_descent(obj, std::move(d), tol, max_iters, delta0, probe_step, trace, iter_offset);
}

}  // namespace detail

// Bailey-style start: each appointment after the previous one by the
// sample mean duration of the job ahead of it.
inline Schedule mean_gap_schedule(const ScenarioSet& sc, std::span<const std::size_t> order) {
  std::vector<double> gaps(order.size() - 1);
  for (std::size_t k = 0; k + 1 < order.size(); ++k) gaps[k] = sc.column_mean(order[k]);
  return Schedule::from_gaps(gaps);
}

// Minimizes C_m over 0 <= s_2 <= ... <= s_n for jobs taken in `order`.
inline SolveResult solve_schedule(const CostFunction& g, const ScenarioSet& sc, std::span<const std::size_t> order,
                                  const SolverOptions& opts = {}) {
  if (sc.rows() == 0) throw DomainError("solve_schedule: empty scenario set");
  if (sc.cols() < 2) throw DomainError("solve_schedule: need at least two jobs");
  detail::check_order(order, sc.cols());
  if (!(opts.tol > 0.0)) throw DomainError("solve_schedule: tol must be positive");

  constexpr std::size_t kWarmFloor = 10000;
  // Polyak target offset on refinement levels: the previous level's optimum is
  // already within sampling distance of this one.
  constexpr double kWarmDelta = 2e-5;
  constexpr double kSmoothedDelta = 1e-3;
  constexpr std::size_t kSmoothingIters = 200;
  std::vector<std::size_t> levels{sc.rows()};
  if (opts.warm_start) {
    while (levels.back() / 10 >= kWarmFloor) levels.push_back(levels.back() / 10);
  }
  std::reverse(levels.begin(), levels.end());

  const Schedule start = mean_gap_schedule(sc, order);
  // Scale from the jobs that can affect the cost; the last one never does.
  double mean_duration = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    mean_duration += sc.column_mean(order[k]) / static_cast<double>(order.size() - 1);
  }
  const double probe_step = 1e-3 * mean_duration;
  std::vector<double> d(start.gaps().begin(), start.gaps().end());

  SolveResult result;
  std::vector<TracePoint>* trace = opts.trace ? &result.trace : nullptr;
  bool converged = false;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const bool last = li + 1 == levels.size();
    const SampleObjective sample(g, sc, order, levels[li]);
    detail::GapObjective obj(sample);
    const double tol = last ? opts.tol : std::max(opts.tol, 1e-4);
    double delta0 = li == 0 ? 0.0 : kWarmDelta;
    if (li == 0 && !g.is_smooth()) {
      // Subgradient steps crawl along the kinks of a piecewise-linear C_m, so
      // first run quasi-Newton on g averaged over shrinking windows. Only the
      // start point changes; the exact objective is optimized below.
      for (double width : {1e-1, 1e-2, 1e-3}) {
        const SampleObjective smoothed(g, sc, order, levels[li], width * mean_duration);
        detail::GapObjective sobj(smoothed);
        bool stalled = false;
        auto warm = detail::projected_bfgs(sobj, d, 1e-8, kSmoothingIters, nullptr, 0, &stalled);
        d = std::move(warm.gaps);
        result.iterations += warm.iterations;
      }
      delta0 = kSmoothedDelta;
    }
    auto phase = detail::solve_level(obj, d, g.is_smooth(), tol, opts.max_iters, delta0, probe_step,
                                     last ? trace : nullptr, result.iterations);
    if (li > 0) {
      // Never hand back something worse than the start point of this level.
      std::vector<double> tmp(d.size());
      const double f_start = obj.eval(d, tmp);
      if (f_start < phase.value) phase.gaps = d;
    }
    d = std::move(phase.gaps);
    result.iterations += phase.iterations;
    converged = phase.converged;
  }

  // The initial schedule is always a candidate, which keeps value <= C_m(start).
  result.schedule = Schedule::from_gaps(d);
  const auto final_est = saa_objective(g, result.schedule, sc, order);
  const auto start_est = saa_objective(g, start, sc, order);
  if (start_est.value < final_est.value) {
    result.schedule = start;
    result.value = start_est.value;
    result.std_error = start_est.std_error;
  } else {
    result.value = final_est.value;
    result.std_error = final_est.std_error;
  }
  result.converged = converged;
  return result;
}

inline SolveResult solve_schedule(const CostFunction& g, const ScenarioSet& sc, const SolverOptions& opts = {}) {
  const auto order = identity_order(sc.cols());
  return solve_schedule(g, sc, order, opts);
}

// Largest decrease of C_m found by moving one appointment time by +-step
// (moves that would leave the ordered cone are skipped). Near zero at an optimum.
inline double perturbation_gain(const CostFunction& g, const ScenarioSet& sc, std::span<const std::size_t> order,
                                const Schedule& s, double step) {
  const SampleObjective obj(g, sc, order);
  const double base = obj.value(s.times());
  std::vector<double> t(s.times().begin(), s.times().end());
  double gain = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      auto probe = t;
      probe[k] += sign * step;
      const double lo = k == 0 ? 0.0 : probe[k - 1];
      const double hi = k + 1 < probe.size() ? probe[k + 1] : std::numeric_limits<double>::infinity();
      if (probe[k] < lo || probe[k] > hi) continue;
      gain = std::max(gain, base - obj.value(probe));
    }
  }
  return gain;
}

struct BiasRow {
  std::size_t m;
  double mean_optimum;
  std::optional<double> std_error;  // absent with a single replication
  std::size_t unconverged;          // replications whose solver did not certify convergence
};

// For each sample size, solves `replications` independent SAA instances and
// averages their optimal values. E[min C_m] increases toward min c as m grows.
inline std::vector<BiasRow> bias_experiment(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                            std::span<const std::size_t> m_grid, std::size_t replications,
                                            std::uint64_t seed, const SolverOptions& opts = {}) {
  if (jobs.size() < 2) throw DomainError("bias_experiment: need at least two jobs");
  if (m_grid.empty()) throw DomainError("bias_experiment: empty sample-size grid");
  if (replications == 0) throw DomainError("bias_experiment: need at least one replication");
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] == 0) throw DomainError("bias_experiment: sample sizes must be positive");
    if (i > 0 && m_grid[i] <= m_grid[i - 1]) throw DomainError("bias_experiment: sample sizes must be ascending");
  }
  std::vector<BiasRow> rows;
  for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
    std::vector<double> optima(replications);
    std::size_t unconverged = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      const auto rep_seed = rng::derive_seed(seed, mi * 1000003ULL + r);
      const auto sc = sample_matrix(jobs, m_grid[mi], rep_seed);
      const auto res = solve_schedule(g, sc, opts);
      optima[r] = res.value;
      if (!res.converged) ++unconverged;
    }
    const auto est = mean_and_std_error(optima);
    BiasRow row{m_grid[mi], est.mean, std::nullopt, unconverged};
    if (replications >= 2) row.std_error = est.std_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace asp
