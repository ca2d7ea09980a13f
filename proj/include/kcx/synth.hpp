#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kcx/fft.hpp"
#include "kcx/parallel.hpp"
#include "kcx/record.hpp"
#include "kcx/spectral.hpp"

namespace kcx {

/// Synthetic K-complex template: a biphasic pulse with a smooth envelope and
/// a sharp central zero crossing,
///
///   u(tau) = -sin^2(pi tau) * sin(2 pi tau^p),   p = ln 2 / ln 3,
///
/// with tau = time normalized by the duration. The time warp tau^p places
/// the sign change exactly at tau = (1/2)^(1/p) = 1/3, giving the sharp
/// first lobe and slower second lobe of the textbook negative-then-positive
/// morphology, and the slope through the crossing stays steep, which keeps
/// the amplitude span meaningful under added noise. The sin^2 envelope makes
/// the pulse C2 at both ends, confining its energy above 10 Hz to under
/// -40 dB of the total. The sampled pulse is rescaled so the realized
/// peak-to-trough equals peak_to_trough_uv exactly; positive polarity flips
/// the sign. The annotated event time is the central zero crossing.
struct TemplateSpec {
  double duration_s = 1.0;  // [0.5, 1.5]
  double peak_to_trough_uv = 90.0;
  enum class Polarity { kNeg, kPos, kRandom };
  Polarity polarity = Polarity::kNeg;

  void validate() const {
    if (!(duration_s >= 0.5 && duration_s <= 1.5))
      throw Error("template duration must lie in [0.5, 1.5] s");
    if (peak_to_trough_uv < 0.0) throw Error("peak-to-trough must be non-negative");
  }
};

struct BackgroundSpec {
  enum class Kind { kPink, kWhite };
  Kind noise_kind = Kind::kPink;
  double rms_uv = 15.0;

  void validate() const {
    if (!(rms_uv >= 0.0)) throw Error("background RMS must be non-negative");
  }
};

struct EventSpec {
  std::size_t count = 0;
  TemplateSpec template_spec;
  double min_separation_s = 3.0;
  double channel_visibility = 1.0;  // fraction of channels carrying each event

  void validate() const {
    template_spec.validate();
    if (count > 1 && !(min_separation_s > 0.0))
      throw Error("min separation must be positive");
    if (!(channel_visibility > 0.0 && channel_visibility <= 1.0))
      throw Error("channel visibility must lie in (0, 1]");
  }
};

struct SynthSpec {
  std::uint64_t seed = 0;
  double duration_s = 60.0;
  double sampling_rate_hz = 250.0;
  std::size_t channel_count = 1;
  BackgroundSpec background;
  EventSpec events;

  void validate() const {
    if (!(duration_s > 0.0)) throw Error("duration must be positive");
    if (!(sampling_rate_hz > 0.0)) throw Error("sampling rate must be positive");
    if (channel_count == 0) throw Error("channel count must be positive");
    background.validate();
    events.validate();
  }
};

struct SynthCorpus {
  EegRecord record;
  AnnotationSet truth;
  SynthSpec spec;
};

namespace detail {

// Stream-separating seed mix (splitmix64 step) so channels and the event
// layout draw from independent deterministic generators.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double template_shape(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  constexpr double warp = 0.6309297535714575;  // ln 2 / ln 3
  const double env = std::sin(std::numbers::pi * tau);
  return -env * env * std::sin(2.0 * std::numbers::pi * std::pow(tau, warp));
}

inline std::vector<double> pink_noise(std::size_t n, double sampling_rate_hz,
                                      std::mt19937_64& rng) {
  std::size_t padded = 2;
  while (padded < n) padded <<= 1;
  RealFft fft(padded);
  std::vector<std::complex<double>> spec(fft.bins(), 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double df = sampling_rate_hz / static_cast<double>(padded);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = df * static_cast<double>(k);
    const double amp = 1.0 / std::sqrt(f);  // 1/f power shape
    if (k + 1 == spec.size())
      spec[k] = {normal(rng) * amp, 0.0};  // Nyquist bin stays real
    else
      spec[k] = {normal(rng) * amp, normal(rng) * amp};
  }
  std::vector<double> out(padded);
  fft.inverse(spec.data(), out.data());
  out.resize(n);
  return out;
}

inline void normalize_rms(std::vector<double>& x, double target_rms) {
  double accum = 0.0;
  for (double v : x) accum += v * v;
  const double rms = std::sqrt(accum / static_cast<double>(x.size()));
  if (rms <= 0.0) return;
  const double scale = target_rms / rms;
  for (double& v : x) v *= scale;
}

}  // namespace detail

/// The sampled template at the given rate, scaled to the exact requested
/// peak-to-trough. `inverted` flips the polarity.
inline std::vector<double> template_samples(const TemplateSpec& tpl,
                                            double sampling_rate_hz, bool inverted) {
  tpl.validate();
  const auto n = static_cast<std::size_t>(tpl.duration_s * sampling_rate_hz);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / (sampling_rate_hz * tpl.duration_s);
    out[i] = detail::template_shape(tau);
  }
  const auto [mn, mx] = std::minmax_element(out.begin(), out.end());
  const double span = *mx - *mn;
  const double scale = span > 0.0 ? tpl.peak_to_trough_uv / span : 0.0;
  for (double& v : out) v *= inverted ? -scale : scale;
  return out;
}

/// Deterministic synthetic EEG corpus with planted K-complexes. The truth
/// annotation of each event is the exact time of its central zero crossing.
/// Channel synthesis is seed-deterministic regardless of the thread count.
inline SynthCorpus generate(const SynthSpec& spec, int threads = 0) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.duration_s * spec.sampling_rate_hz);
  const double tpl_dur = spec.events.template_spec.duration_s;
  constexpr double kLobeSplit = 1.0 / 3.0;

  // Event layout: sorted uniform draws plus fixed offsets guarantee the
  // minimum separation without rejection sampling.
  std::vector<double> crossings(spec.events.count);
  std::vector<std::uint8_t> inverted(spec.events.count, 0);
  std::vector<std::vector<std::uint8_t>> carries(
      spec.events.count, std::vector<std::uint8_t>(spec.channel_count, 0));
  if (spec.events.count > 0) {
    const double margin = tpl_dur;
    const double slack = spec.duration_s - 2.0 * margin -
                         (spec.events.count - 1) * spec.events.min_separation_s;
    if (slack < 0.0)
      throw Error("cannot fit " + std::to_string(spec.events.count) +
                  " events of minimum separation " +
                  std::to_string(spec.events.min_separation_s) + " s into " +
                  std::to_string(spec.duration_s) + " s");
    std::mt19937_64 rng(detail::mix_seed(spec.seed, 0xe7e7));
    std::uniform_real_distribution<double> uni(0.0, slack);
    std::vector<double> u(spec.events.count);
    for (auto& v : u) v = uni(rng);
    std::sort(u.begin(), u.end());
    for (std::size_t e = 0; e < spec.events.count; ++e)
      crossings[e] = margin + u[e] + e * spec.events.min_separation_s;

    const auto visible = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(spec.events.channel_visibility * spec.channel_count)));
    std::vector<std::size_t> order(spec.channel_count);
    std::bernoulli_distribution flip(0.5);
    for (std::size_t e = 0; e < spec.events.count; ++e) {
      using P = TemplateSpec::Polarity;
      inverted[e] = spec.events.template_spec.polarity == P::kPos ||
                    (spec.events.template_spec.polarity == P::kRandom && flip(rng));
      for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t v = 0; v < visible; ++v) carries[e][order[v]] = 1;
    }
  }

  SynthCorpus corpus;
  corpus.spec = spec;
  corpus.truth.events = crossings;
  corpus.record.sampling_rate_hz = spec.sampling_rate_hz;
  corpus.record.samples.assign(spec.channel_count, {});
  for (std::size_t c = 0; c < spec.channel_count; ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "ch%02zu", c);
    corpus.record.channel_names.emplace_back(name);
  }

  // unit peak-to-trough of the continuous shape, for exact amplitude scaling
  double shape_min = 0.0, shape_max = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const double v = detail::template_shape(i / 4096.0);
    shape_min = std::min(shape_min, v);
    shape_max = std::max(shape_max, v);
  }
  const double scale =
      spec.events.template_spec.peak_to_trough_uv / (shape_max - shape_min);
  parallel_for(0, spec.channel_count, resolve_threads(threads), [&](std::size_t c) {
    std::mt19937_64 rng(detail::mix_seed(spec.seed, c));
    auto& ch = corpus.record.samples[c];
    if (spec.background.noise_kind == BackgroundSpec::Kind::kPink) {
      ch = detail::pink_noise(n, spec.sampling_rate_hz, rng);
    } else {
      ch.resize(n);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : ch) v = normal(rng);
    }
    detail::normalize_rms(ch, spec.background.rms_uv);

    // The template sampled on the record grid relative to each exact
    // crossing time; the unit shape spans peak-to-trough 2.
    for (std::size_t e = 0; e < crossings.size(); ++e) {
      if (!carries[e][c]) continue;
      const double start = crossings[e] - kLobeSplit * tpl_dur;
      const double sign = (inverted[e] ? -1.0 : 1.0) * scale;
      const auto first =
          static_cast<std::size_t>(std::ceil(start * spec.sampling_rate_hz));
      const auto last = std::min<std::size_t>(
          n - 1,
          static_cast<std::size_t>(std::floor((start + tpl_dur) * spec.sampling_rate_hz)));
      for (std::size_t s = first; s <= last; ++s) {
        const double tau = (s / spec.sampling_rate_hz - start) / tpl_dur;
        ch[s] += sign * detail::template_shape(tau);
      }
    }
  });
  return corpus;
}

/// Mean band powers in event-centered windows versus event-free windows,
/// a sanity profile for generated corpora.
struct SpectralProfile {
  std::array<double, 4> event_mean{};
  std::array<double, 4> background_mean{};
  std::size_t event_windows = 0;
  std::size_t background_windows = 0;
};

inline SpectralProfile spectral_profile(const SynthCorpus& corpus,
                                        const WindowSpec& window = {},
                                        const std::array<BandDef, 4>& bands = default_bands(),
                                        double cutoff_hz = kDefaultCutoffHz) {
  const WindowIndexing indexing = make_windows(corpus.record, window);
  const double window_s = window.length_samples / corpus.record.sampling_rate_hz;
  const double half_window_s = window_s / 2.0;
  SpectralProfile profile;
  std::array<double, 4> ev_sum{}, bg_sum{};
  FeatureExtractor ex(window.length_samples, corpus.record.sampling_rate_hz, bands,
                      cutoff_hz);
  for (std::size_t c = 0; c < corpus.record.channel_count(); ++c) {
    const double* data = corpus.record.samples[c].data();
    for (std::size_t i = 0; i < indexing.window_count; ++i) {
      const double center = indexing.center_time_s(i);
      double nearest = std::numeric_limits<double>::infinity();
      for (double t : corpus.truth.events)
        nearest = std::min(nearest, std::abs(t - center));
      const bool near_event = nearest <= half_window_s;
      const bool far_from_event = nearest >= 2.0 * window_s;
      if (!near_event && !far_from_event) continue;
      const FeatureFrame f = ex.extract(data + indexing.start_sample(i));
      const std::array<double, 4> p = {f.p1, f.p2, f.p3, f.p4};
      if (near_event) {
        for (std::size_t b = 0; b < 4; ++b) ev_sum[b] += p[b];
        ++profile.event_windows;
      } else {
        for (std::size_t b = 0; b < 4; ++b) bg_sum[b] += p[b];
        ++profile.background_windows;
      }
    }
  }
  for (std::size_t b = 0; b < 4; ++b) {
    if (profile.event_windows > 0) profile.event_mean[b] = ev_sum[b] / profile.event_windows;
    if (profile.background_windows > 0)
      profile.background_mean[b] = bg_sum[b] / profile.background_windows;
  }
  return profile;
}

}  // namespace kcx
