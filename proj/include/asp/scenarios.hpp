#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "asp/distributions.hpp"
#include "asp/errors.hpp"
#include "asp/rng.hpp"

namespace asp {

// m x n sample of job durations (rows are scenarios, columns are jobs in
// their original order) together with the uniforms that produced them.
// Draws are keyed by (seed, row, job id), so reordering jobs reorders
// columns rather than redrawing: comparisons across sequences are paired.
class ScenarioSet {
 public:
  ScenarioSet(std::vector<double> durations, std::vector<double> uniforms, std::size_t rows, std::size_t cols,
              std::uint64_t seed, std::vector<std::size_t> job_ids)
      : durations_(std::move(durations)),
        uniforms_(std::move(uniforms)),
        rows_(rows),
        cols_(cols),
        seed_(seed),
        job_ids_(std::move(job_ids)) {
    if (durations_.size() != rows_ * cols_ || uniforms_.size() != rows_ * cols_ || job_ids_.size() != cols_) {
      throw DimensionError("scenario set: buffer sizes disagree with shape");
    }
    column_means_.assign(cols_, 0.0);
    std::vector<double> column(rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t r = 0; r < rows_; ++r) column[r] = durations_[r * cols_ + c];
      column_means_[c] = rows_ ? pairwise_sum(column) / static_cast<double>(rows_) : 0.0;
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::size_t>& job_ids() const noexcept { return job_ids_; }

  double duration(std::size_t row, std::size_t col) const { return durations_[row * cols_ + col]; }
  double uniform(std::size_t row, std::size_t col) const { return uniforms_[row * cols_ + col]; }
  std::span<const double> row(std::size_t r) const { return {durations_.data() + r * cols_, cols_}; }
  std::span<const double> durations() const noexcept { return durations_; }
  std::span<const double> uniforms() const noexcept { return uniforms_; }

  double column_mean(std::size_t col) const { return column_means_.at(col); }

  std::vector<double> column(std::size_t col) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = durations_[r * cols_ + col];
    return out;
  }

  bool operator==(const ScenarioSet&) const = default;

 private:
  std::vector<double> durations_;
  std::vector<double> uniforms_;
  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t seed_;
  std::vector<std::size_t> job_ids_;
  std::vector<double> column_means_;
};

inline ScenarioSet sample_matrix(std::span<const DurationDistribution> jobs, std::size_t m, std::uint64_t seed) {
  if (jobs.empty()) throw DomainError("sample_matrix: no jobs");
  if (m == 0) throw DomainError("sample_matrix: need at least one scenario");
  const std::size_t n = jobs.size();
  std::vector<double> u(m * n);
  std::vector<double> x(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double draw = rng::uniform(seed, r, c);
      u[r * n + c] = draw;
      x[r * n + c] = quantile(jobs[c], draw);
    }
  }
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ScenarioSet(std::move(x), std::move(u), m, n, seed, std::move(ids));
}

inline std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

}  // namespace asp
