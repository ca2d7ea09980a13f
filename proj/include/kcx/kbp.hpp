#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kcx/detections.hpp"
#include "kcx/parallel.hpp"
#include "kcx/record.hpp"
#include "kcx/spectral.hpp"
#include "kcx/threshold.hpp"

namespace kcx {

/// K-complex Band Power detector parameters. Defaults are the stock
/// tuning optimum (window 1.024 s / step 0.1024 s realized as 256 / 26
/// samples at 250 Hz).
struct KbpParams {
  double p_t_p1 = 0.81;
  double p_t_p2 = 0.86;
  double p_t_p3 = 0.98;
  double p_t_p4 = 0.89;
  double p_t_s = 0.70;
  int v_t = 2;
  WindowSpec window{256, 26};
  std::array<BandDef, 4> bands = default_bands();
  double cutoff_hz = kDefaultCutoffHz;
  int gap_windows = 4;

  std::array<double, 5> p_values() const { return {p_t_p1, p_t_p2, p_t_p3, p_t_p4, p_t_s}; }

  void set_p_values(const std::array<double, 5>& p) {
    p_t_p1 = p[0];
    p_t_p2 = p[1];
    p_t_p3 = p[2];
    p_t_p4 = p[3];
    p_t_s = p[4];
  }

  void validate() const {
    window.validate();
    for (double p : p_values()) ThresholdSpec{p}.validate();
    if (v_t < 0) throw Error("v_t must be non-negative");
    if (gap_windows < 0) throw Error("gap_windows must be non-negative");
    for (const auto& b : bands) b.validate();
    if (!(cutoff_hz > 0.0)) throw Error("low-pass cutoff must be positive");
  }
};

/// All FeatureFrames of one record, the expensive half of detection.
/// Computed once and shared across threshold/voting passes (the tuner
/// re-runs only the cheap half per grid point).
struct FeatureTable {
  WindowIndexing indexing;
  std::vector<std::vector<FeatureFrame>> frames;  // [channel][window]

  std::size_t channel_count() const { return frames.size(); }
};

/// Per-channel per-feature sorted value arrays backing quantile lookups.
struct SortedFeatures {
  std::vector<std::array<std::vector<double>, 5>> per_channel;
};

struct ChannelThresholds {
  std::array<Threshold, 5> t;
};

inline FeatureTable compute_features(const EegRecord& record, const WindowSpec& window,
                                     const std::array<BandDef, 4>& bands,
                                     double cutoff_hz, int threads = 0) {
  record.validate();
  FeatureTable table;
  table.indexing = make_windows(record, window);
  const std::size_t channels = record.channel_count();
  const std::size_t windows = table.indexing.window_count;
  table.frames.assign(channels, std::vector<FeatureFrame>(windows));

  // Flat (channel, window-block) task list for even load on any core count.
  const std::size_t block = 1024;
  const std::size_t blocks_per_channel = (windows + block - 1) / block;
  parallel_for(0, channels * blocks_per_channel, resolve_threads(threads),
               [&](std::size_t task) {
                 const std::size_t c = task / blocks_per_channel;
                 const std::size_t b = task % blocks_per_channel;
                 const std::size_t lo = b * block;
                 const std::size_t hi = std::min(windows, lo + block);
                 FeatureExtractor ex(window.length_samples, record.sampling_rate_hz,
                                     bands, cutoff_hz);
                 const double* data = record.samples[c].data();
                 for (std::size_t i = lo; i < hi; ++i)
                   table.frames[c][i] =
                       ex.extract(data + table.indexing.start_sample(i));
               });
  return table;
}

inline SortedFeatures sort_features(const FeatureTable& table, int threads = 0) {
  SortedFeatures sorted;
  sorted.per_channel.resize(table.channel_count());
  parallel_for(0, table.channel_count(), resolve_threads(threads), [&](std::size_t c) {
    for (std::size_t f = 0; f < 5; ++f) {
      auto& dst = sorted.per_channel[c][f];
      dst.resize(table.frames[c].size());
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = table.frames[c][i].values()[f];
      std::sort(dst.begin(), dst.end());
    }
  });
  return sorted;
}

/// Thresholds for every channel at the given per-feature p values.
inline std::vector<ChannelThresholds> compute_thresholds(
    const SortedFeatures& sorted, const std::array<double, 5>& p_values) {
  std::vector<ChannelThresholds> out(sorted.per_channel.size());
  for (std::size_t c = 0; c < out.size(); ++c)
    for (std::size_t f = 0; f < 5; ++f)
      out[c].t[f] = empirical_threshold_sorted(sorted.per_channel[c][f], p_values[f]);
  return out;
}

/// L_i for one channel: the OR of the five per-feature logic values.
inline std::vector<std::uint8_t> channel_flags(const std::vector<FeatureFrame>& frames,
                                               const ChannelThresholds& thresholds) {
  std::vector<std::uint8_t> flags(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto v = frames[i].values();
    std::uint8_t bit = 0;
    for (std::size_t f = 0; f < 5; ++f) bit |= logic_value(v[f], thresholds.t[f]);
    flags[i] = bit;
  }
  return flags;
}

struct KbpResult {
  Detections detections;
  WindowIndexing indexing;
  std::vector<int> votes;           // per window
  std::vector<std::uint8_t> marks;  // votes > v_t
  std::vector<ChannelThresholds> thresholds;
};

/// Threshold + fuse + vote + coalesce on precomputed features. Channel
/// evaluation order never affects the result: votes are integer sums.
inline KbpResult detect_kbp_cached(const FeatureTable& table, const SortedFeatures& sorted,
                                   const KbpParams& params) {
  params.validate();
  if (table.channel_count() <= static_cast<std::size_t>(params.v_t))
    throw Error("v_t = " + std::to_string(params.v_t) +
                " requires more than v_t channels, record has " +
                std::to_string(table.channel_count()));
  KbpResult res;
  res.indexing = table.indexing;
  res.thresholds = compute_thresholds(sorted, params.p_values());
  std::vector<std::vector<std::uint8_t>> flags(table.channel_count());
  for (std::size_t c = 0; c < table.channel_count(); ++c)
    flags[c] = channel_flags(table.frames[c], res.thresholds[c]);
  res.votes = vote_counts(flags);
  res.marks = marks_from_votes(res.votes, params.v_t);
  res.detections = coalesce(res.marks, res.votes, res.indexing, params.gap_windows);
  return res;
}

inline KbpResult detect_kbp(const EegRecord& record, const KbpParams& params,
                            int threads = 0) {
  params.validate();
  const FeatureTable table =
      compute_features(record, params.window, params.bands, params.cutoff_hz, threads);
  const SortedFeatures sorted = sort_features(table, threads);
  return detect_kbp_cached(table, sorted, params);
}

}  // namespace kcx
