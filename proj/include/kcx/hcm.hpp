#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kcx/detections.hpp"
#include "kcx/parallel.hpp"
#include "kcx/record.hpp"
#include "kcx/spectral.hpp"
#include "kcx/threshold.hpp"

namespace kcx {

/// Harmonic space: one axis per selected FFT bin, carrying that bin's power.
/// Axes are partitioned into boxes: [0, floor) is box 0, then geometrically
/// growing boxes of width ratio log_base.
struct HarmonicSpaceSpec {
  std::vector<std::size_t> harmonic_bins;  // distinct, ascending
  double log_base = 2.0;
  std::vector<double> linear_floor;  // per bin, > 0; empty = derive at calibration

  std::size_t dimensions() const { return harmonic_bins.size(); }

  void validate(std::size_t spectrum_bins) const {
    if (harmonic_bins.empty()) throw Error("harmonic space needs at least one bin");
    if (!(log_base > 1.0)) throw Error("log base must exceed 1");
    for (std::size_t i = 0; i < harmonic_bins.size(); ++i) {
      if (harmonic_bins[i] >= spectrum_bins)
        throw Error("harmonic bin " + std::to_string(harmonic_bins[i]) +
                    " outside spectrum of " + std::to_string(spectrum_bins) + " bins");
      if (i > 0 && harmonic_bins[i] <= harmonic_bins[i - 1])
        throw Error("harmonic bins must be distinct and ascending");
    }
    if (!linear_floor.empty()) {
      if (linear_floor.size() != harmonic_bins.size())
        throw Error("linear_floor must have one entry per harmonic bin");
      for (double f : linear_floor)
        if (!(f > 0.0)) throw Error("linear_floor entries must be positive");
    }
  }
};

/// Spectrum bins whose center frequencies are nearest the target
/// frequencies (ties go to the lower bin).
inline std::vector<std::size_t> bins_nearest_hz(std::span<const double> targets_hz,
                                                double sampling_rate_hz,
                                                std::size_t window_len) {
  const double bin_width = sampling_rate_hz / static_cast<double>(window_len);
  const std::size_t bins = window_len / 2 + 1;
  std::vector<std::size_t> out;
  for (double f : targets_hz) {
    std::size_t best = 0;
    double best_err = std::abs(f);
    for (std::size_t k = 1; k < bins; ++k) {
      const double err = std::abs(bin_width * static_cast<double>(k) - f);
      if (err < best_err) {
        best_err = err;
        best = k;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Default harmonic set: the bins nearest 1, 2, 3, 4 and 7 Hz.
inline std::vector<std::size_t> default_harmonic_bins(double sampling_rate_hz,
                                                      std::size_t window_len) {
  const std::array<double, 5> hz = {1.0, 2.0, 3.0, 4.0, 7.0};
  return bins_nearest_hz(hz, sampling_rate_hz, window_len);
}

using HarmonicPoint = std::vector<double>;

inline HarmonicPoint harmonic_point(const PowerSpectrum& spectrum,
                                    const HarmonicSpaceSpec& spec) {
  spec.validate(spectrum.bin_powers.size());
  HarmonicPoint p(spec.dimensions());
  for (std::size_t j = 0; j < spec.dimensions(); ++j)
    p[j] = spectrum.bin_powers[spec.harmonic_bins[j]];
  return p;
}

struct BoxIndex {
  std::vector<std::uint32_t> coords;
  auto operator<=>(const BoxIndex&) const = default;
};

/// Componentwise box coordinates: 0 below the linear floor, then
/// 1 + floor(log_base(x / floor)). Boundaries are generated by repeated
/// multiplication so the mapping is exactly monotone in x.
inline BoxIndex box_index(std::span<const double> point, const HarmonicSpaceSpec& spec) {
  if (point.size() != spec.dimensions() ||
      spec.linear_floor.size() != spec.dimensions())
    throw Error("box_index: point/spec dimension mismatch");
  BoxIndex idx;
  idx.coords.resize(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    const double x = point[j];
    if (x < 0.0) throw Error("box_index: negative coordinate");
    const double floor_j = spec.linear_floor[j];
    if (x < floor_j) {
      idx.coords[j] = 0;
      continue;
    }
    std::uint32_t k = 1;
    double bound = floor_j * spec.log_base;
    while (x >= bound) {
      bound *= spec.log_base;
      ++k;
    }
    idx.coords[j] = k;
  }
  return idx;
}

/// Box coordinates observed around annotated K-complexes, plus everything
/// needed to reproduce the mapping on a new record.
struct BoxStore {
  HarmonicSpaceSpec spec;
  WindowSpec window;
  std::set<BoxIndex> boxes;
  std::vector<std::string> record_ids;       // calibration provenance
  std::size_t skipped_annotations = 0;       // outside the window center range
  std::vector<std::string> channel_subset;   // empty = all channels

  bool contains(const BoxIndex& idx) const { return boxes.count(idx) > 0; }
};

namespace detail {

/// Per-window powers at the selected bins for every channel of a record:
/// points[channel][window * dims + j].
inline std::vector<std::vector<double>> harmonic_points_by_channel(
    const EegRecord& record, const std::vector<std::size_t>& bins,
    const WindowIndexing& indexing, int threads) {
  const std::size_t dims = bins.size();
  const std::size_t windows = indexing.window_count;
  std::vector<std::vector<double>> points(record.channel_count());
  for (auto& p : points) p.resize(windows * dims);
  const std::size_t len = indexing.spec.length_samples;
  parallel_for(0, record.channel_count(), resolve_threads(threads), [&](std::size_t c) {
    RealFft fft(len);
    std::vector<std::complex<double>> spec(fft.bins());
    std::vector<double> powers(fft.bins());
    const double* data = record.samples[c].data();
    for (std::size_t i = 0; i < windows; ++i) {
      fft.forward(data + indexing.start_sample(i), spec.data());
      fill_bin_powers(spec.data(), spec.size(), len, powers.data());
      for (std::size_t j = 0; j < dims; ++j)
        points[c][i * dims + j] = powers[bins[j]];
    }
  });
  return points;
}

inline std::size_t nearest_window(const WindowIndexing& indexing, double t) {
  const double len_half = indexing.spec.length_samples / 2.0;
  const double step = static_cast<double>(indexing.spec.step_samples);
  const double raw = (t * indexing.sampling_rate_hz - len_half) / step;
  auto i = static_cast<std::int64_t>(std::llround(raw));
  i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(indexing.window_count) - 1);
  // llround on the affine inverse can be off by one at float boundaries;
  // settle it against the neighbors, lower index wins ties.
  auto dist = [&](std::int64_t w) { return std::abs(indexing.center_time_s(w) - t); };
  if (i > 0 && dist(i - 1) <= dist(i)) --i;
  else if (i + 1 < static_cast<std::int64_t>(indexing.window_count) && dist(i + 1) < dist(i)) ++i;
  return static_cast<std::size_t>(i);
}

inline std::vector<std::size_t> resolve_channel_subset(
    const EegRecord& record, const std::vector<std::string>& subset) {
  std::vector<std::size_t> chosen;
  if (subset.empty()) {
    chosen.resize(record.channel_count());
    for (std::size_t c = 0; c < chosen.size(); ++c) chosen[c] = c;
    return chosen;
  }
  for (const auto& name : subset) {
    const auto it =
        std::find(record.channel_names.begin(), record.channel_names.end(), name);
    if (it == record.channel_names.end())
      throw Error("calibration channel \"" + name + "\" not found in record");
    chosen.push_back(static_cast<std::size_t>(it - record.channel_names.begin()));
  }
  return chosen;
}

}  // namespace detail

/// Build the box store from an annotated record: for every annotation and
/// every (selected) channel, the window whose center time is nearest the
/// event contributes its box. Floors left empty in `spec` are derived as the
/// 10th-percentile nonzero power per harmonic over the calibration windows.
inline BoxStore calibrate_hcm(const EegRecord& record, const AnnotationSet& truth,
                              HarmonicSpaceSpec spec, const WindowSpec& window,
                              const std::vector<std::string>& channel_subset = {},
                              int threads = 0, const std::string& record_id = "") {
  record.validate();
  if (truth.events.empty()) throw Error("calibrate_hcm: no annotations");
  if (spec.harmonic_bins.empty())
    spec.harmonic_bins =
        default_harmonic_bins(record.sampling_rate_hz, window.length_samples);
  spec.validate(window.length_samples / 2 + 1);

  const WindowIndexing indexing = make_windows(record, window);
  const auto channels = detail::resolve_channel_subset(record, channel_subset);
  const auto points =
      detail::harmonic_points_by_channel(record, spec.harmonic_bins, indexing, threads);
  const std::size_t dims = spec.dimensions();

  if (spec.linear_floor.empty()) {
    spec.linear_floor.resize(dims);
    std::vector<double> nonzero;
    for (std::size_t j = 0; j < dims; ++j) {
      nonzero.clear();
      for (std::size_t c : channels)
        for (std::size_t i = 0; i < indexing.window_count; ++i) {
          const double v = points[c][i * dims + j];
          if (v > 0.0) nonzero.push_back(v);
        }
      if (nonzero.empty()) {
        spec.linear_floor[j] = 1e-12;
        continue;
      }
      std::sort(nonzero.begin(), nonzero.end());
      spec.linear_floor[j] = empirical_threshold_sorted(nonzero, 0.10).value;
    }
  }

  BoxStore store;
  store.spec = spec;
  store.window = window;
  store.channel_subset = channel_subset;
  if (!record_id.empty()) store.record_ids.push_back(record_id);

  for (double t : truth.events) {
    if (t < indexing.center_time_s(0) ||
        t > indexing.center_time_s(indexing.window_count - 1)) {
      ++store.skipped_annotations;
      continue;
    }
    const std::size_t i = detail::nearest_window(indexing, t);
    for (std::size_t c : channels) {
      const std::span<const double> point(points[c].data() + i * dims, dims);
      store.boxes.insert(box_index(point, spec));
    }
  }
  return store;
}

struct HcmParams {
  double p_t = 0.80;  // <= 0 disables the power condition
  int v_t = 0;
  int gap_windows = 4;

  void validate() const {
    if (p_t > 1.0) throw Error("p_t must be <= 1");
    if (v_t < 0) throw Error("v_t must be non-negative");
    if (gap_windows < 0) throw Error("gap_windows must be non-negative");
  }
};

struct HcmResult {
  Detections detections;
  WindowIndexing indexing;
  std::vector<int> votes;
  std::vector<std::uint8_t> marks;
};

/// Detect on a new record: a window passes on a channel iff its box is in
/// the store and, unless disabled, at least one harmonic power exceeds that
/// channel's own p_t quantile for the same harmonic (thresholds are
/// self-calibrated on the record under detection). Channel passes are then
/// voted and coalesced exactly like the band-power detector.
inline HcmResult detect_hcm(const EegRecord& record, const BoxStore& store,
                            const HcmParams& params = {}, int threads = 0) {
  record.validate();
  params.validate();
  if (store.boxes.empty()) throw Error("detect_hcm: empty box store");
  store.spec.validate(store.window.length_samples / 2 + 1);
  if (store.spec.linear_floor.size() != store.spec.dimensions())
    throw Error("detect_hcm: store carries no linear floors; recalibrate");
  if (record.channel_count() <= static_cast<std::size_t>(params.v_t))
    throw Error("v_t must be smaller than the channel count");

  const WindowIndexing indexing = make_windows(record, store.window);
  const auto points = detail::harmonic_points_by_channel(record, store.spec.harmonic_bins,
                                                         indexing, threads);
  const std::size_t dims = store.spec.dimensions();
  const std::size_t windows = indexing.window_count;

  std::vector<std::vector<std::uint8_t>> flags(record.channel_count());
  parallel_for(0, record.channel_count(), resolve_threads(threads), [&](std::size_t c) {
    // Per-channel per-harmonic power thresholds at p_t.
    std::vector<Threshold> thr(dims);
    if (params.p_t > 0.0) {
      std::vector<double> values(windows);
      for (std::size_t j = 0; j < dims; ++j) {
        for (std::size_t i = 0; i < windows; ++i) values[i] = points[c][i * dims + j];
        std::sort(values.begin(), values.end());
        thr[j] = empirical_threshold_sorted(values, params.p_t);
      }
    }
    auto& ch_flags = flags[c];
    ch_flags.assign(windows, 0);
    for (std::size_t i = 0; i < windows; ++i) {
      const std::span<const double> point(points[c].data() + i * dims, dims);
      if (!store.contains(box_index(point, store.spec))) continue;
      bool power_ok = params.p_t <= 0.0;
      for (std::size_t j = 0; !power_ok && j < dims; ++j)
        power_ok = point[j] > thr[j].value;
      ch_flags[i] = power_ok ? 1 : 0;
    }
  });

  HcmResult res;
  res.indexing = indexing;
  res.votes = vote_counts(flags);
  res.marks = marks_from_votes(res.votes, params.v_t);
  res.detections = coalesce(res.marks, res.votes, res.indexing, params.gap_windows);
  return res;
}

}  // namespace kcx
