#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "kcx/record.hpp"

namespace kcx {

/// Iterative radix-2 decimation-in-time FFT for a fixed power-of-two size.
/// The bit-reversal table and twiddle factors are precomputed once so a plan
/// can be reused across many windows. Plans are immutable after construction
/// and safe to share between threads; the transform buffers are caller-owned.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0 || !std::has_single_bit(n))
      throw Error("FFT size must be a power of two, got " + std::to_string(n));
    bitrev_.resize(n);
    const int bits = std::countr_zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    // contiguous per-stage twiddles, starting at the len = 8 stage
    for (std::size_t len = 8; len <= n; len <<= 1) {
      const std::size_t half = len >> 1;
      std::vector<double> stage(half * 2);
      for (std::size_t k = 0; k < half; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / len;
        stage[2 * k] = std::cos(angle);
        stage[2 * k + 1] = std::sin(angle);
      }
      stage_twiddles_.push_back(std::move(stage));
    }
  }

  std::size_t size() const { return n_; }

  /// In-place forward DFT, unscaled: X[k] = sum_m x[m] e^{-2pi i k m / n}.
  void forward(std::complex<double>* data) const {
    if (n_ < 2) return;
    permute(data);
    auto* d = reinterpret_cast<double*>(data);

    // len = 2: twiddle 1
    for (std::size_t base = 0; base < 2 * n_; base += 4) {
      const double ar = d[base], ai = d[base + 1];
      const double br = d[base + 2], bi = d[base + 3];
      d[base] = ar + br;
      d[base + 1] = ai + bi;
      d[base + 2] = ar - br;
      d[base + 3] = ai - bi;
    }
    if (n_ >= 4) {
      // len = 4: twiddles 1 and -i (multiply by -i swaps components)
      for (std::size_t base = 0; base < 2 * n_; base += 8) {
        const double ar = d[base], ai = d[base + 1];
        const double br = d[base + 4], bi = d[base + 5];
        d[base] = ar + br;
        d[base + 1] = ai + bi;
        d[base + 4] = ar - br;
        d[base + 5] = ai - bi;
        const double cr = d[base + 2], ci = d[base + 3];
        const double er = d[base + 6], ei = d[base + 7];  // -i * e = (ei, -er)
        d[base + 2] = cr + ei;
        d[base + 3] = ci - er;
        d[base + 6] = cr - ei;
        d[base + 7] = ci + er;
      }
    }
    std::size_t stage = 0;
    for (std::size_t len = 8; len <= n_; len <<= 1, ++stage) {
      const std::size_t half = len >> 1;
      const double* tw = stage_twiddles_[stage].data();
      for (std::size_t base = 0; base < 2 * n_; base += 2 * len) {
        for (std::size_t k = 0; k < half; ++k) {
          const double wr = tw[2 * k], wi = tw[2 * k + 1];
          double* a = d + base + 2 * k;
          double* b = a + len;  // element base + k + half
          const double br = b[0], bi = b[1];
          const double tr = wr * br - wi * bi;
          const double ti = wr * bi + wi * br;
          const double ar = a[0], ai = a[1];
          b[0] = ar - tr;
          b[1] = ai - ti;
          a[0] = ar + tr;
          a[1] = ai + ti;
        }
      }
    }
  }

  /// In-place inverse DFT including the 1/n scale.
  void inverse(std::complex<double>* data) const {
    for (std::size_t i = 0; i < n_; ++i) data[i] = std::conj(data[i]);
    forward(data);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] = std::conj(data[i]) * scale;
  }

 private:
  void permute(std::complex<double>* data) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(data[i], data[j]);
    }
  }

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::vector<double>> stage_twiddles_;
};

/// Real-input FFT of size n done as an n/2 complex transform plus unpacking.
/// forward() produces the one-sided spectrum X[0..n/2]; inverse() consumes
/// the same layout and reconstructs n real samples (conjugate symmetry of
/// the discarded upper half is implied). Each instance owns scratch buffers,
/// so use one instance per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), half_plan_(half_size(n)), scratch_(n / 2) {
    unpack_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / n;
      unpack_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// out must hold n/2 + 1 complex bins.
  void forward(const double* in, std::complex<double>* out) {
    const std::size_t h = n_ / 2;
    for (std::size_t m = 0; m < h; ++m) scratch_[m] = {in[2 * m], in[2 * m + 1]};
    half_plan_.forward(scratch_.data());
    // Split Z[k] = E[k] + i O[k] into even/odd spectra, then twiddle together.
    out[0] = {scratch_[0].real() + scratch_[0].imag(), 0.0};
    out[h] = {scratch_[0].real() - scratch_[0].imag(), 0.0};
    for (std::size_t k = 1; k < h; ++k) {
      const std::complex<double> zk = scratch_[k];
      const std::complex<double> zm = std::conj(scratch_[h - k]);
      const std::complex<double> even = 0.5 * (zk + zm);
      const std::complex<double> odd = std::complex<double>(0.0, -0.5) * (zk - zm);
      out[k] = even + unpack_[k] * odd;
    }
  }

  /// in must hold n/2 + 1 bins; out receives n real samples.
  void inverse(const std::complex<double>* in, double* out) {
    const std::size_t h = n_ / 2;
    scratch_[0] = {0.5 * (in[0].real() + in[h].real()),
                   0.5 * (in[0].real() - in[h].real())};
    for (std::size_t k = 1; k < h; ++k) {
      const std::complex<double> xk = in[k];
      const std::complex<double> xm = std::conj(in[h - k]);
      const std::complex<double> even = 0.5 * (xk + xm);
      // (xk - xm)/2 = w^k O[k]; multiply by i w^{-k} to get i O[k] directly.
      const std::complex<double> odd_i =
          std::complex<double>(0.0, 0.5) * (xk - xm) * std::conj(unpack_[k]);
      scratch_[k] = even + odd_i;
    }
    half_plan_.inverse(scratch_.data());
    for (std::size_t m = 0; m < h; ++m) {
      out[2 * m] = scratch_[m].real();
      out[2 * m + 1] = scratch_[m].imag();
    }
  }

 private:
  static std::size_t half_size(std::size_t n) {
    if (n < 2 || !std::has_single_bit(n))
      throw Error("real FFT size must be a power of two >= 2, got " + std::to_string(n));
    return n / 2;
  }

  std::size_t n_;
  FftPlan half_plan_;
  std::vector<std::complex<double>> scratch_;
  std::vector<std::complex<double>> unpack_;
};

}  // namespace kcx
