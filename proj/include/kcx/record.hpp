#pragma once

#include <bit>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcx {

/// Error type for data and contract violations. The CLI maps these to
/// exit code 2; anything thrown while parsing flags stays exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Immutable multichannel EEG signal: equal-length channels sampled at one
/// rate, amplitudes in microvolts. Stored as doubles regardless of the file
/// precision. Safe for concurrent read-only use once constructed.
struct EegRecord {
  std::vector<std::string> channel_names;
  double sampling_rate_hz = 0.0;
  std::vector<std::vector<double>> samples;  // [channel][sample]

  std::size_t channel_count() const { return samples.size(); }
  std::size_t samples_per_channel() const {
    return samples.empty() ? 0 : samples.front().size();
  }
  double duration_s() const {
    return static_cast<double>(samples_per_channel()) / sampling_rate_hz;
  }

  void validate() const {
    if (samples.empty()) throw Error("record has no channels");
    if (channel_names.size() != samples.size())
      throw Error("channel name count (" + std::to_string(channel_names.size()) +
                  ") does not match channel count (" + std::to_string(samples.size()) + ")");
    if (!(sampling_rate_hz > 0.0)) throw Error("sampling rate must be positive");
    const std::size_t n = samples.front().size();
    for (std::size_t c = 1; c < samples.size(); ++c)
      if (samples[c].size() != n)
        throw Error("channel " + std::to_string(c) + " has " +
                    std::to_string(samples[c].size()) + " samples, expected " +
                    std::to_string(n));
  }
};

/// Ordered event times in seconds from record start, produced either by a
/// human annotator or by a detector. Strictly increasing after loading.
struct AnnotationSet {
  std::vector<double> events;
};

struct WindowSpec {
  std::size_t length_samples = 256;
  std::size_t step_samples = 26;

  void validate() const {
    if (length_samples == 0 || step_samples == 0)
      throw Error("window length and step must be positive");
    if (step_samples > length_samples)
      throw Error("window step (" + std::to_string(step_samples) +
                  ") exceeds window length (" + std::to_string(length_samples) + ")");
    if (!std::has_single_bit(length_samples))
      throw Error("window length must be a power of two, got " +
                  std::to_string(length_samples));
  }

  bool operator==(const WindowSpec&) const = default;
};

/// Window layout for one record: window i covers samples
/// [i*step, i*step + length); the last window is the final fully contained
/// one, trailing samples are dropped.
struct WindowIndexing {
  WindowSpec spec;
  double sampling_rate_hz = 0.0;
  std::size_t window_count = 0;

  std::size_t start_sample(std::size_t i) const { return i * spec.step_samples; }
  double center_time_s(std::size_t i) const {
    return (static_cast<double>(start_sample(i)) + spec.length_samples / 2.0) /
           sampling_rate_hz;
  }
};

inline WindowIndexing make_windows(const EegRecord& record, const WindowSpec& spec) {
  spec.validate();
  const std::size_t n = record.samples_per_channel();
  if (n < spec.length_samples)
    throw Error("record has " + std::to_string(n) +
                " samples per channel, shorter than one window of " +
                std::to_string(spec.length_samples));
  WindowIndexing idx;
  idx.spec = spec;
  idx.sampling_rate_hz = record.sampling_rate_hz;
  idx.window_count = (n - spec.length_samples) / spec.step_samples + 1;
  return idx;
}

/// Seconds-to-samples conversion used by the CLI: round half up.
inline std::size_t seconds_to_samples(double seconds, double sampling_rate_hz) {
  if (!(seconds > 0.0)) throw Error("duration must be positive");
  return static_cast<std::size_t>(seconds * sampling_rate_hz + 0.5);
}

}  // namespace kcx
