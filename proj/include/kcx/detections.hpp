#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kcx/record.hpp"

namespace kcx {

/// Point events extracted from per-window marks, with the strongest vote
/// count seen inside the run as per-event support.
struct Detections {
  struct Event {
    double t = 0.0;   // seconds
    int support = 0;  // max channel votes within the run
  };
  std::vector<Event> events;

  AnnotationSet to_annotations() const {
    AnnotationSet set;
    set.events.reserve(events.size());
    for (const auto& e : events) set.events.push_back(e.t);
    return set;
  }
};

/// Per-window sum of channel flags.
inline std::vector<int> vote_counts(const std::vector<std::vector<std::uint8_t>>& flags) {
  if (flags.empty()) throw Error("vote: no channels");
  const std::size_t windows = flags.front().size();
  for (const auto& ch : flags)
    if (ch.size() != windows) throw Error("vote: channel flag lengths differ");
  std::vector<int> votes(windows, 0);
  for (const auto& ch : flags)
    for (std::size_t i = 0; i < windows; ++i) votes[i] += ch[i];
  return votes;
}

/// A window is marked iff strictly more than v_t channels flagged it.
inline std::vector<std::uint8_t> marks_from_votes(const std::vector<int>& votes, int v_t) {
  std::vector<std::uint8_t> marks(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) marks[i] = votes[i] > v_t ? 1 : 0;
  return marks;
}

inline std::vector<std::uint8_t> vote(const std::vector<std::vector<std::uint8_t>>& flags,
                                      int v_t) {
  return marks_from_votes(vote_counts(flags), v_t);
}

/// Merge runs of marked windows separated by at most gap_windows unmarked
/// ones into point events. Event time is the vote-weighted mean center time
/// of the run's marked windows; support is the run's maximum vote count.
inline Detections coalesce(const std::vector<std::uint8_t>& marks,
                           const std::vector<int>& votes, const WindowIndexing& indexing,
                           int gap_windows) {
  if (marks.size() != votes.size() || marks.size() != indexing.window_count)
    throw Error("coalesce: marks/votes/indexing size mismatch");
  Detections out;
  const std::size_t n = marks.size();
  std::size_t i = 0;
  while (i < n) {
    if (!marks[i]) {
      ++i;
      continue;
    }
    // run start; extend while the next marked window is within the gap
    double weighted_time = 0.0;
    double weight = 0.0;
    int support = 0;
    std::size_t last_marked = i;
    for (std::size_t j = i; j < n; ++j) {
      if (marks[j]) {
        weighted_time += votes[j] * indexing.center_time_s(j);
        weight += votes[j];
        if (votes[j] > support) support = votes[j];
        last_marked = j;
      } else if (j - last_marked > static_cast<std::size_t>(gap_windows)) {
        break;
      }
    }
    out.events.push_back({weighted_time / weight, support});
    i = last_marked + 1;
  }
  return out;
}

}  // namespace kcx
