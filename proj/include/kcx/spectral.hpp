#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kcx/fft.hpp"
#include "kcx/record.hpp"

namespace kcx {

/// One-sided window power spectrum. Scaling convention: the sum of
/// bin_powers equals the mean squared sample value of the window (Parseval
/// anchor), with the folded upper half absorbed into bins 1..n/2-1.
struct PowerSpectrum {
  std::vector<double> bin_powers;  // length n/2 + 1, microvolts^2
  double bin_width_hz = 0.0;       // sampling_rate / window_length

  double nyquist_hz() const { return bin_width_hz * (bin_powers.size() - 1); }
  double bin_center_hz(std::size_t k) const { return bin_width_hz * k; }
};

struct BandDef {
  double lo_hz = 0.0;
  double hi_hz = 0.0;

  void validate() const {
    if (!(lo_hz < hi_hz)) throw Error("band bounds must satisfy lo < hi");
    if (lo_hz < 0.0) throw Error("band lower bound must be >= 0");
  }
};

/// The four overlapping low-frequency bands straddling the K-complex
/// spectral mass.
inline std::array<BandDef, 4> default_bands() {
  return {BandDef{0.0, 3.5}, BandDef{1.0, 4.5}, BandDef{2.0, 5.5}, BandDef{3.0, 6.5}};
}

inline constexpr double kDefaultCutoffHz = 10.0;

/// Per-window feature vector: four band powers plus the amplitude span of
/// the low-pass reconstruction.
struct FeatureFrame {
  double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0, s = 0.0;

  std::array<double, 5> values() const { return {p1, p2, p3, p4, s}; }
};

inline constexpr std::array<std::string_view, 5> kFeatureNames = {"p1", "p2", "p3",
                                                                  "p4", "s"};

namespace detail {

// Shared by power_spectrum() and FeatureExtractor so both paths produce
// bit-identical powers: one-sided |X_k|^2 with Parseval normalization.
inline void fill_bin_powers(const std::complex<double>* spec, std::size_t bins,
                            std::size_t window_len, double* out) {
  const double inv_n2 = 1.0 / (static_cast<double>(window_len) * window_len);
  out[0] = std::norm(spec[0]) * inv_n2;
  for (std::size_t k = 1; k + 1 < bins; ++k) out[k] = 2.0 * std::norm(spec[k]) * inv_n2;
  out[bins - 1] = std::norm(spec[bins - 1]) * inv_n2;
}

// Inclusive bin range [k_lo, k_hi] whose center frequencies fall inside the
// band; k_lo > k_hi encodes an empty band.
inline std::pair<std::size_t, std::size_t> band_bin_range(const BandDef& band,
                                                          double bin_width_hz,
                                                          std::size_t bins) {
  std::size_t k_lo = bins, k_hi = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = bin_width_hz * static_cast<double>(k);
    if (f >= band.lo_hz && f <= band.hi_hz) {
      if (k_lo == bins) k_lo = k;
      k_hi = k;
    }
  }
  return {k_lo, k_hi};
}

inline double sum_bins(const double* powers, std::size_t k_lo, std::size_t k_hi) {
  double acc = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) acc += powers[k];
  return acc;
}

// Span for one polarity: value at the (first) global maximum of sign*x minus
// the value at the first plateau-tolerant local minimum after it. Degenerate
// geometry (maximum at the end, or no following local minimum) yields 0.
inline double directed_span(const double* x, std::size_t n, double sign) {
  std::size_t imax = 0;
  double vmax = sign * x[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double v = sign * x[i];
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
  }
  for (std::size_t j = imax + 1; j + 1 < n; ++j) {
    const double v = sign * x[j];
    if (v <= sign * x[j - 1] && v <= sign * x[j + 1]) return vmax - v;
  }
  return 0.0;
}

}  // namespace detail

/// FFT power spectrum of one window (length must be a power of two).
inline PowerSpectrum power_spectrum(std::span<const double> window,
                                    double sampling_rate_hz) {
  if (window.empty()) throw Error("power_spectrum: empty window");
  RealFft fft(window.size());
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(window.data(), spec.data());
  PowerSpectrum ps;
  ps.bin_width_hz = sampling_rate_hz / static_cast<double>(window.size());
  ps.bin_powers.resize(fft.bins());
  detail::fill_bin_powers(spec.data(), spec.size(), window.size(), ps.bin_powers.data());
  return ps;
}

/// Sum of bin powers whose center frequency lies in [lo, hi] (both ends
/// inclusive).
inline double band_power(const PowerSpectrum& spec, const BandDef& band) {
  band.validate();
  if (band.hi_hz > spec.nyquist_hz() + 1e-12)
    throw Error("band upper bound " + std::to_string(band.hi_hz) +
                " Hz exceeds Nyquist " + std::to_string(spec.nyquist_hz()) + " Hz");
  const auto [k_lo, k_hi] =
      detail::band_bin_range(band, spec.bin_width_hz, spec.bin_powers.size());
  if (k_lo > k_hi) return 0.0;
  return detail::sum_bins(spec.bin_powers.data(), k_lo, k_hi);
}

/// Zero every FFT coefficient with center frequency above the cutoff and
/// transform back. Idempotent; output length equals input length.
inline std::vector<double> lowpass_reconstruct(std::span<const double> window,
                                               double sampling_rate_hz,
                                               double cutoff_hz = kDefaultCutoffHz) {
  if (!(cutoff_hz > 0.0)) throw Error("low-pass cutoff must be positive");
  if (window.empty()) throw Error("lowpass_reconstruct: empty window");
  RealFft fft(window.size());
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(window.data(), spec.data());
  const double bin_width = sampling_rate_hz / static_cast<double>(window.size());
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (bin_width * static_cast<double>(k) > cutoff_hz) spec[k] = 0.0;
  std::vector<double> out(window.size());
  fft.inverse(spec.data(), out.data());
  return out;
}

/// Amplitude span S: the drop from the global maximum to the first local
/// minimum after it, computed for both signal polarities, larger value wins.
/// Depends only on sample differences, so it is shift-invariant.
inline double amplitude_span(std::span<const double> x) {
  if (x.empty()) throw Error("amplitude_span: empty sequence");
  const double pos = detail::directed_span(x.data(), x.size(), 1.0);
  const double neg = detail::directed_span(x.data(), x.size(), -1.0);
  return pos > neg ? pos : neg;
}

/// Reusable per-thread worker computing FeatureFrames. Shares one forward
/// transform between the band powers and the low-pass reconstruction, and
/// reuses the plan and scratch buffers across windows.
class FeatureExtractor {
 public:
  FeatureExtractor(std::size_t window_len, double sampling_rate_hz,
                   const std::array<BandDef, 4>& bands = default_bands(),
                   double cutoff_hz = kDefaultCutoffHz)
      : fft_(window_len),
        window_len_(window_len),
        spec_(window_len / 2 + 1),
        powers_(window_len / 2 + 1),
        smooth_(window_len) {
    if (!(cutoff_hz > 0.0)) throw Error("low-pass cutoff must be positive");
    const double bin_width = sampling_rate_hz / static_cast<double>(window_len);
    const double nyquist = bin_width * static_cast<double>(window_len / 2);
    for (std::size_t b = 0; b < 4; ++b) {
      bands[b].validate();
      if (bands[b].hi_hz > nyquist + 1e-12)
        throw Error("band upper bound exceeds Nyquist frequency");
      ranges_[b] = detail::band_bin_range(bands[b], bin_width, spec_.size());
    }
    cutoff_bins_ = 0;
    while (cutoff_bins_ < spec_.size() &&
           bin_width * static_cast<double>(cutoff_bins_) <= cutoff_hz)
      ++cutoff_bins_;
  }

  FeatureFrame extract(const double* window) {
    fft_.forward(window, spec_.data());
    detail::fill_bin_powers(spec_.data(), spec_.size(), window_len_, powers_.data());
    FeatureFrame f;
    f.p1 = sum_range(0);
    f.p2 = sum_range(1);
    f.p3 = sum_range(2);
    f.p4 = sum_range(3);
    for (std::size_t k = cutoff_bins_; k < spec_.size(); ++k) spec_[k] = 0.0;
    fft_.inverse(spec_.data(), smooth_.data());
    f.s = amplitude_span(smooth_);
    return f;
  }

  /// Bin powers of the most recent extract() call (harmonic-space input).
  std::span<const double> last_bin_powers() const { return powers_; }

 private:
  double sum_range(std::size_t b) const {
    const auto [k_lo, k_hi] = ranges_[b];
    if (k_lo > k_hi) return 0.0;
    return detail::sum_bins(powers_.data(), k_lo, k_hi);
  }

  RealFft fft_;
  std::size_t window_len_;
  std::array<std::pair<std::size_t, std::size_t>, 4> ranges_;
  std::size_t cutoff_bins_;
  std::vector<std::complex<double>> spec_;
  std::vector<double> powers_;
  std::vector<double> smooth_;
};

/// One-shot composition of the three spectral operations above.
inline FeatureFrame feature_frame(std::span<const double> window, double sampling_rate_hz,
                                  const std::array<BandDef, 4>& bands = default_bands(),
                                  double cutoff_hz = kDefaultCutoffHz) {
  FeatureExtractor ex(window.size(), sampling_rate_hz, bands, cutoff_hz);
  return ex.extract(window.data());
}

}  // namespace kcx
