#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace asp {

// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 128;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // of the mean; 0 when fewer than two values
};

// Two-pass mean and standard error of the mean.
inline MeanEstimate mean_and_std_error(std::span<const double> values) {
  MeanEstimate out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;

  // Deviations are reduced with the same pairwise tree.
  constexpr std::size_t kLeaf = 128;
  auto sq_dev = [&](auto&& self, std::span<const double> v) -> double {
    if (v.size() <= kLeaf) {
      double acc = 0.0;
      for (double x : v) acc += (x - out.mean) * (x - out.mean);
      return acc;
    }
    const std::size_t half = v.size() / 2;
    return self(self, v.first(half)) + self(self, v.subspan(half));
  };
  const double var = sq_dev(sq_dev, values) / (n - 1.0);
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace asp
