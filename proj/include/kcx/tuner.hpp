#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kcx/kbp.hpp"
#include "kcx/metrics.hpp"
#include "kcx/parallel.hpp"
#include "kcx/record.hpp"

namespace kcx {

struct DatasetItem {
  EegRecord record;
  AnnotationSet truth;
  std::string id;
};

/// Exhaustive grid over the six KBP tuning values. Flat indices decode with
/// p1 outermost and v_t innermost, which fixes "first in grid order" for
/// tie-breaking.
struct ParamGrid {
  std::array<std::vector<double>, 5> p;  // p1..p4, s
  std::vector<int> v_t;

  std::size_t size() const {
    std::size_t n = v_t.size();
    for (const auto& axis : p) n *= axis.size();
    return n;
  }

  void validate() const {
    for (const auto& axis : p) {
      if (axis.empty()) throw Error("grid axis must be non-empty");
      for (double v : axis) ThresholdSpec{v}.validate();
    }
    if (v_t.empty()) throw Error("grid v_t axis must be non-empty");
    for (int v : v_t)
      if (v < 0) throw Error("v_t must be non-negative");
  }

  /// Decode a flat index into a full parameter set on top of `base`
  /// (window, bands, cutoff and gap are not part of the search).
  KbpParams at(std::size_t flat, const KbpParams& base) const {
    KbpParams params = base;
    params.v_t = v_t[flat % v_t.size()];
    flat /= v_t.size();
    std::array<double, 5> values{};
    for (std::size_t f = 5; f-- > 0;) {
      values[f] = p[f][flat % p[f].size()];
      flat /= p[f].size();
    }
    params.set_p_values(values);
    return params;
  }
};

/// Coarse default bracketing the stock optimum: p in {0.70, 0.72, ...,
/// 0.98} per feature, v_t in 0..5.
inline ParamGrid default_grid() {
  ParamGrid grid;
  std::vector<double> ps;
  for (int i = 70; i <= 98; i += 2) ps.push_back(i / 100.0);
  grid.p = {ps, ps, ps, ps, ps};
  grid.v_t = {0, 1, 2, 3, 4, 5};
  return grid;
}

struct TuneEntry {
  std::size_t index = 0;
  std::array<double, 5> p{};
  int v_t = 0;
  ConfusionCounts counts;
  std::optional<double> tpr, ppv, fpr;
};

struct TuneResult {
  bool feasible = false;
  KbpParams best;
  std::size_t best_index = 0;
  ConfusionCounts counts;
  std::optional<double> tpr_pct, ppv_pct, fpr_pct;
  std::size_t evaluated_count = 0;
  double constraint_tpr_pct = 99.0;
  std::vector<TuneEntry> trace;  // filled only when requested
};

namespace detail {

struct Candidate {
  bool valid = false;
  bool feasible = false;
  double tpr = -1.0;
  double ppv = -1.0;
  double fpr = std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  ConfusionCounts counts;
};

// Selection order: any feasible beats any infeasible; feasible compare by
// (ppv desc, tpr desc, fpr asc, index asc); infeasible by (tpr desc,
// ppv desc, fpr asc, index asc). Total order, so parallel reduction is
// deterministic.
inline bool better(const Candidate& a, const Candidate& b) {
  if (!a.valid || !b.valid) return a.valid;
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) {
    if (a.ppv != b.ppv) return a.ppv > b.ppv;
    if (a.tpr != b.tpr) return a.tpr > b.tpr;
  } else {
    if (a.tpr != b.tpr) return a.tpr > b.tpr;
    if (a.ppv != b.ppv) return a.ppv > b.ppv;
  }
  if (a.fpr != b.fpr) return a.fpr < b.fpr;
  return a.index < b.index;
}

}  // namespace detail

/// Brute-force search: every grid combination is evaluated on pooled
/// confusion counts over the dataset; the winner is the maximum-PPV
/// combination among those with TPR >= constraint, or the maximum-TPR
/// combination flagged infeasible when none qualifies.
///
/// FeatureFrames and sorted feature arrays are computed once per record.
/// They do not depend on p or v_t, so every grid point reuses them and only
/// thresholds, fusion, voting and metrics are re-run.
inline TuneResult grid_search(const std::vector<DatasetItem>& dataset,
                              const ParamGrid& grid, const KbpParams& base,
                              const MatchSpec& match, double constraint_tpr_pct = 99.0,
                              int threads = 0, bool keep_trace = false) {
  if (dataset.empty()) throw Error("grid_search: empty dataset");
  grid.validate();
  base.validate();

  struct RecordCache {
    FeatureTable table;
    SortedFeatures sorted;
    double duration_s = 0.0;
    const AnnotationSet* truth = nullptr;
  };
  std::vector<RecordCache> cache(dataset.size());
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    cache[r].table = compute_features(dataset[r].record, base.window, base.bands,
                                      base.cutoff_hz, threads);
    cache[r].sorted = sort_features(cache[r].table, threads);
    cache[r].duration_s = dataset[r].record.duration_s();
    cache[r].truth = &dataset[r].truth;
  }

  const std::size_t total = grid.size();
  TuneResult result;
  result.constraint_tpr_pct = constraint_tpr_pct;
  result.evaluated_count = total;
  if (keep_trace) result.trace.resize(total);

  const int workers = resolve_threads(threads);
  std::vector<detail::Candidate> best_per_worker(workers);
  const std::size_t chunk = (total + workers - 1) / workers;

  parallel_for(0, static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    detail::Candidate local_best;
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(total, lo + chunk);
    for (std::size_t g = lo; g < hi; ++g) {
      const KbpParams params = grid.at(g, base);
      ConfusionCounts pooled;
      for (const auto& rc : cache) {
        const KbpResult det = detect_kbp_cached(rc.table, rc.sorted, params);
        pooled += evaluate(rc.duration_s, det.detections.to_annotations(), *rc.truth,
                           match);
      }
      detail::Candidate cand;
      cand.valid = true;
      cand.index = g;
      cand.counts = pooled;
      cand.tpr = tpr_pct(pooled).value_or(-1.0);
      cand.ppv = ppv_pct(pooled).value_or(-1.0);
      cand.fpr = fpr_pct(pooled).value_or(std::numeric_limits<double>::infinity());
      cand.feasible = cand.tpr >= constraint_tpr_pct;
      if (detail::better(cand, local_best)) local_best = cand;
      if (keep_trace) {
        TuneEntry& e = result.trace[g];
        e.index = g;
        e.p = params.p_values();
        e.v_t = params.v_t;
        e.counts = pooled;
        e.tpr = tpr_pct(pooled);
        e.ppv = ppv_pct(pooled);
        e.fpr = fpr_pct(pooled);
      }
    }
    best_per_worker[w] = local_best;
  });

  detail::Candidate winner;
  for (const auto& cand : best_per_worker)
    if (detail::better(cand, winner)) winner = cand;
  if (!winner.valid) throw Error("grid_search: empty grid");

  result.feasible = winner.feasible;
  result.best = grid.at(winner.index, base);
  result.best_index = winner.index;
  result.counts = winner.counts;
  result.tpr_pct = tpr_pct(winner.counts);
  result.ppv_pct = ppv_pct(winner.counts);
  result.fpr_pct = fpr_pct(winner.counts);
  return result;
}

}  // namespace kcx
