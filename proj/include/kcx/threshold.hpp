#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kcx/record.hpp"

namespace kcx {

struct Threshold {
  double value = 0.0;
};

struct ThresholdSpec {
  double p_t = 0.0;  // probability of a feature value below the threshold

  void validate() const {
    if (!(p_t >= 0.0 && p_t <= 1.0))
      throw Error("p_t must lie in [0, 1], got " + std::to_string(p_t));
  }
};

namespace detail {

// Smallest count c such that c/n >= p_t. The 1e-9 slack absorbs the binary
// representation of decimal p values (0.8 * 100 evaluates just above 80).
inline std::size_t quantile_rank(std::size_t n, double p_t) {
  const double k = std::ceil(static_cast<double>(n) * p_t - 1e-9);
  if (k <= 0.0) return 0;
  if (k >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Empirical quantile threshold on an already sorted sample: the smallest
/// element with at least a p_t fraction of the sample strictly below it,
/// falling back to the maximum when no element qualifies (ties at the top,
/// or p_t = 1).
inline Threshold empirical_threshold_sorted(std::span<const double> sorted, double p_t) {
  if (sorted.empty()) throw Error("empirical_threshold: empty sample");
  ThresholdSpec{p_t}.validate();
  const std::size_t n = sorted.size();
  const std::size_t k = detail::quantile_rank(n, p_t);
  if (k == 0) return {sorted.front()};
  if (k >= n) return {sorted.back()};
  if (sorted[k] > sorted[k - 1]) return {sorted[k]};
  // sorted[k] sits inside a tie run that started before rank k; the next
  // strictly greater element is the first with enough mass below it.
  const auto it = std::upper_bound(sorted.begin() + k, sorted.end(), sorted[k]);
  return {it == sorted.end() ? sorted.back() : *it};
}

inline Threshold empirical_threshold(std::span<const double> values, double p_t) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return empirical_threshold_sorted(sorted, p_t);
}

/// Per-window logic value: 1 iff the feature strictly exceeds the threshold.
inline int logic_value(double feature, Threshold t) { return feature > t.value ? 1 : 0; }

/// Fixed-width histogram with the cumulative fraction curve, kept for the
/// CLI dump; thresholding itself uses the exact quantile above.
struct Histogram {
  std::vector<double> bin_left;
  std::vector<std::size_t> count;
  std::vector<double> cumulative_fraction;
};

inline Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw Error("histogram: empty sample");
  if (bins == 0) throw Error("histogram: bin count must be positive");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  const double width = mx > mn ? (mx - mn) / static_cast<double>(bins) : 1.0;
  Histogram h;
  h.bin_left.resize(bins);
  h.count.assign(bins, 0);
  h.cumulative_fraction.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) h.bin_left[b] = mn + width * b;
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - mn) / width);
    if (b >= bins) b = bins - 1;
    ++h.count[b];
  }
  std::size_t running = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    running += h.count[b];
    h.cumulative_fraction[b] =
        static_cast<double>(running) / static_cast<double>(values.size());
  }
  return h;
}

}  // namespace kcx
