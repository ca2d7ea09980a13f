#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "kcx/record.hpp"

namespace kcx {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MatchSpec {
  double tolerance_s = 0.5;   // half-width of the match window around a truth event
  double tn_interval_s = 1.0; // quiet-interval length for TN counting

  void validate() const {
    if (!(tolerance_s > 0.0)) throw Error("match tolerance must be positive");
    if (!(tn_interval_s > 0.0)) throw Error("TN interval must be positive");
  }
};

/// One-to-one event matching by a left-to-right sweep over both sorted
/// lists: a pair within +-tolerance is matched and both cursors advance,
/// otherwise the earlier side is declared unmatched. For points on a line
/// this attains the maximum possible number of matches, so TP never depends
/// on which of two plausible pairings a tie-break would pick.
inline ConfusionCounts match_events(const AnnotationSet& detections,
                                    const AnnotationSet& truth, const MatchSpec& spec) {
  spec.validate();
  ConfusionCounts c;
  std::size_t i = 0, j = 0;
  const auto& t = truth.events;
  const auto& d = detections.events;
  while (i < t.size() && j < d.size()) {
    if (std::abs(t[i] - d[j]) <= spec.tolerance_s) {
      ++c.tp;
      ++i;
      ++j;
    } else if (d[j] < t[i]) {
      ++j;  // detection too early to match any remaining truth
    } else {
      ++i;  // truth out of reach of all remaining detections
    }
  }
  c.fp = static_cast<std::int64_t>(d.size()) - c.tp;
  c.fn = static_cast<std::int64_t>(t.size()) - c.tp;
  return c;
}

/// Number of whole intervals [k*iv, (k+1)*iv) within the record duration
/// that contain neither a truth nor a detection event. The trailing partial
/// interval is dropped.
inline std::int64_t count_tn(double duration_s, const AnnotationSet& detections,
                             const AnnotationSet& truth, const MatchSpec& spec) {
  spec.validate();
  if (!(duration_s > 0.0)) throw Error("duration must be positive");
  const auto intervals =
      static_cast<std::int64_t>(std::floor(duration_s / spec.tn_interval_s));
  std::unordered_set<std::int64_t> occupied;
  auto mark = [&](const std::vector<double>& events) {
    for (double t : events) {
      const auto k = static_cast<std::int64_t>(std::floor(t / spec.tn_interval_s));
      if (k >= 0 && k < intervals) occupied.insert(k);
    }
  };
  mark(truth.events);
  mark(detections.events);
  return intervals - static_cast<std::int64_t>(occupied.size());
}

/// Full confusion counts for one record.
inline ConfusionCounts evaluate(double duration_s, const AnnotationSet& detections,
                                const AnnotationSet& truth, const MatchSpec& spec) {
  ConfusionCounts c = match_events(detections, truth, spec);
  c.tn = count_tn(duration_s, detections, truth, spec);
  return c;
}

// Quality ratios in percent; nullopt when the denominator is zero (never a
// silent 0).
inline std::optional<double> tpr_pct(const ConfusionCounts& c) {
  const auto den = c.tp + c.fn;
  if (den <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

inline std::optional<double> fpr_pct(const ConfusionCounts& c) {
  const auto den = c.fp + c.tn;
  if (den <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.fp) / static_cast<double>(den);
}

inline std::optional<double> ppv_pct(const ConfusionCounts& c) {
  const auto den = c.tp + c.fp;
  if (den <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

}  // namespace kcx
