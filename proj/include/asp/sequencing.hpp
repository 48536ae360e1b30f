#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asp/cost.hpp"
#include "asp/distributions.hpp"
#include "asp/errors.hpp"
#include "asp/indices.hpp"
#include "asp/saa.hpp"
#include "asp/scenarios.hpp"
#include "asp/summation.hpp"

namespace asp {

enum class SequencingMethod { heuristic, brute_force };

inline const char* method_name(SequencingMethod m) {
  return m == SequencingMethod::heuristic ? "heuristic" : "brute";
}

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

struct CostBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct SequencingReport {
  std::vector<std::size_t> permutation;
  double est_cost = 0.0;
  double std_error = 0.0;
  Interval ci95;
  std::optional<double> lower_bound;  // absent for the tolerance cost
  std::optional<double> upper_bound;
  SequencingMethod method = SequencingMethod::heuristic;
  SolveResult solve;
};

// Sample size used when the tolerance cost needs sample-based indices.
inline constexpr std::size_t kIndexSamples = 100000;

// Ascending sequencing index, ties kept in original job order.
inline std::vector<std::size_t> heuristic_sequence(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                                   std::uint64_t seed = 1) {
  if (jobs.empty()) throw DomainError("heuristic_sequence: no jobs");
  std::vector<double> idx(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    idx[i] = sequencing_index(g, jobs[i], kIndexSamples, rng::derive_seed(seed, i)).value;
  }
  std::vector<std::size_t> perm(jobs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
  return perm;
}

// sum_{i<n} I*_k(X_i) <= inf c_k <= sum_{i<n} (n - i) I*_k(X_i) for jobs in scheduled order.
inline CostBounds bounds(int k, double alpha, double beta, std::span<const DurationDistribution> jobs) {
  if (k != 1 && k != 2) throw DomainError("bounds: k must be 1 or 2");
  if (jobs.empty()) throw DomainError("bounds: no jobs");
  CostBounds out;
  const std::size_t n = jobs.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = k == 1 ? index_newsvendor(alpha, beta, jobs[i]).value : index_variance(jobs[i]).value;
    out.lower += v;
    out.upper += static_cast<double>(n - 1 - i) * v;
  }
  return out;
}

// Bounds that apply to g, if any.
inline std::optional<CostBounds> bounds_for(const CostFunction& g, std::span<const DurationDistribution> jobs) {
  if (const auto* c = std::get_if<L1Cost>(&g.variant())) return bounds(1, c->alpha, c->beta, jobs);
  if (std::holds_alternative<L2Cost>(g.variant())) return bounds(2, 1.0, 1.0, jobs);
  return std::nullopt;
}

// Forward recursion: s_i is the beta/(alpha+beta) empirical quantile (k = 1)
// or the mean (k = 2) of E_{i-1} under the already fixed s_2..s_{i-1}.
inline Schedule heuristic_schedule(int k, double alpha, double beta, std::span<const DurationDistribution> jobs,
                                   std::size_t m, std::uint64_t seed) {
  if (k != 1 && k != 2) throw DomainError("heuristic_schedule: k must be 1 or 2");
  if (k == 1 && (!(alpha > 0.0) || !(beta > 0.0))) {
    throw DomainError("heuristic_schedule: alpha and beta must be positive");
  }
  if (m < 10000) throw DomainError("heuristic_schedule: need at least 10^4 scenarios");
  if (jobs.size() < 2) throw DomainError("heuristic_schedule: need at least two jobs");
  const auto sc = sample_matrix(jobs, m, seed);
  const std::size_t n = jobs.size();
  std::vector<double> end(m), sorted(m), times(n - 1);
  for (std::size_t r = 0; r < m; ++r) end[r] = sc.duration(r, 0);
  const double p = beta / (alpha + beta);
  for (std::size_t i = 1; i < n; ++i) {
    double s = 0.0;
    if (k == 1) {
      sorted = end;
      auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(m)));
      rank = std::clamp<std::size_t>(rank, 1, m);
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
      s = sorted[rank - 1];
    } else {
      s = pairwise_sum(end) / static_cast<double>(m);
    }
    // Isotonic repair against sampling noise.
    if (i > 1) s = std::max(s, times[i - 2]);
    times[i - 1] = s;
    for (std::size_t r = 0; r < m; ++r) end[r] = std::max(end[r], s) + sc.duration(r, i);
  }
  return Schedule::from_times(times);
}

struct PairedComparison {
  double mean_diff = 0.0;  // a minus b
  double std_error = 0.0;
  Interval ci95;
};

// Scenario-by-scenario cost difference of two (order, schedule) pairs on the same sample.
inline PairedComparison paired_comparison(const CostFunction& g, const ScenarioSet& sc,
                                          std::span<const std::size_t> order_a, const Schedule& a,
                                          std::span<const std::size_t> order_b, const Schedule& b) {
  const SampleObjective oa(g, sc, order_a);
  const SampleObjective ob(g, sc, order_b);
  auto diff = oa.scenario_costs(a.times());
  const auto cb = ob.scenario_costs(b.times());
  for (std::size_t r = 0; r < diff.size(); ++r) diff[r] -= cb[r];
  const auto est = mean_and_std_error(diff);
  return {est.mean, est.std_error, {est.mean - kZ95 * est.std_error, est.mean + kZ95 * est.std_error}};
}

struct PermutationRow {
  std::vector<std::size_t> permutation;
  SolveResult solve;
};

struct BruteForceResult {
  SequencingReport best;
  std::vector<PermutationRow> table;          // sorted by cost, best first
  std::optional<PairedComparison> vs_runner_up;  // best minus runner-up
};

inline constexpr std::size_t kMaxBruteForceJobs = 9;

namespace detail {

// Solves keyed by the ordered prefix of the first n - 1 jobs: the last job never
// enters the cost, so the prefix alone determines the result.
class PrefixMemo {
 public:
  template <class Solve>
  SolveResult get_or_solve(const std::vector<std::size_t>& perm, Solve solve) {
    std::vector<std::size_t> key(perm.begin(), perm.end() - 1);
    {
      std::lock_guard lock(mu_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    auto res = solve();
    std::lock_guard lock(mu_);
    return table_.try_emplace(std::move(key), std::move(res)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::vector<std::size_t>, SolveResult> table_;
};

inline SequencingReport single_job_report(SequencingMethod method) {
  SequencingReport r;
  r.permutation = {0};
  r.method = method;
  r.lower_bound = 0.0;
  r.upper_bound = 0.0;
  r.solve.converged = true;
  return r;
}

inline SequencingReport make_report(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                    std::vector<std::size_t> perm, SolveResult res, SequencingMethod method) {
  SequencingReport r;
  r.est_cost = res.value;
  r.std_error = res.std_error;
  r.ci95 = {res.value - kZ95 * res.std_error, res.value + kZ95 * res.std_error};
  std::vector<DurationDistribution> ordered;
  for (auto j : perm) ordered.push_back(jobs[j]);
  if (auto b = bounds_for(g, ordered)) {
    r.lower_bound = b->lower;
    r.upper_bound = b->upper;
  }
  r.permutation = std::move(perm);
  r.method = method;
  r.solve = std::move(res);
  return r;
}

}  // namespace detail

// Solves the scheduling problem for one given order on a fresh sample.
inline SequencingReport evaluate_sequence(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                          std::vector<std::size_t> perm, std::size_t m, std::uint64_t seed,
                                          SequencingMethod method, const SolverOptions& opts = {}) {
  if (jobs.size() == 1) return detail::single_job_report(method);
  const auto sc = sample_matrix(jobs, m, seed);
  auto res = solve_schedule(g, sc, perm, opts);
  return detail::make_report(g, jobs, std::move(perm), std::move(res), method);
}

inline SequencingReport heuristic_report(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                         std::size_t m, std::uint64_t seed, const SolverOptions& opts = {}) {
  return evaluate_sequence(g, jobs, heuristic_sequence(g, jobs, seed), m, seed, SequencingMethod::heuristic, opts);
}

// Every permutation is solved on one shared sample (draws bound to job ids),
// so cost differences between orders are paired.
inline BruteForceResult brute_force_sequence(const CostFunction& g, std::span<const DurationDistribution> jobs,
                                             std::size_t m, std::uint64_t seed, const SolverOptions& opts = {}) {
  const std::size_t n = jobs.size();
  if (n == 0) throw DomainError("brute_force_sequence: no jobs");
  if (n > kMaxBruteForceJobs) {
    throw RefusedError("brute force over " + std::to_string(n) + " jobs would solve " + std::to_string(n) +
                       "! schedules; the cap is " + std::to_string(kMaxBruteForceJobs) + " jobs");
  }
  if (m < 10000) throw DomainError("brute_force_sequence: need at least 10^4 scenarios");
  BruteForceResult out;
  if (n == 1) {
    out.best = detail::single_job_report(SequencingMethod::brute_force);
    out.table.push_back({{0}, out.best.solve});
    return out;
  }
  const auto sc = sample_matrix(jobs, m, seed);
  detail::PrefixMemo memo;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    auto res = memo.get_or_solve(perm, [&] { return solve_schedule(g, sc, perm, opts); });
    out.table.push_back({perm, std::move(res)});
  } while (std::next_permutation(perm.begin(), perm.end()));
  // Stable: among equal costs the lexicographically first order wins.
  std::stable_sort(out.table.begin(), out.table.end(),
                   [](const PermutationRow& a, const PermutationRow& b) { return a.solve.value < b.solve.value; });
  const auto& best = out.table.front();
  out.best = detail::make_report(g, jobs, best.permutation, best.solve, SequencingMethod::brute_force);
  if (out.table.size() > 1) {
    const auto& second = out.table[1];
    out.vs_runner_up =
        paired_comparison(g, sc, best.permutation, best.solve.schedule, second.permutation, second.solve.schedule);
  }
  return out;
}

}  // namespace asp
