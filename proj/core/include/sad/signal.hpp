// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sad/tensor.hpp"

namespace sad {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WindowKind {
  kSqrtHann,  // periodic sqrt-Hann; its square sums to one at 50% overlap
  kHann,      // periodic Hann; COLA at hop fft/2 and fft/4 for plain OLA
};

struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t hop = 256;
  WindowKind window = WindowKind::kSqrtHann;

  std::size_t bins() const { return fft_size / 2 + 1; }
  double bin_hz(int sample_rate) const {
    return static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  }
  bool operator==(const StftConfig&) const = default;
};

/// Throws ConfigError unless hop <= fft_size, fft_size is even and the
/// squared window overlap-adds to a constant at this hop.
void validate(const StftConfig& cfg);

/// Analysis window (also used for synthesis).
std::vector<double> make_window(const StftConfig& cfg);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;  // [frames x bins], row-major
  StftConfig config;
  int sample_rate = 16000;

  std::complex<double>& at(std::size_t t, std::size_t k) { return values[t * bins + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const {
    return values[t * bins + k];
  }
};

// Frame t covers samples [t*hop, t*hop + fft_size). No padding: the signal
// tail that does not fill a whole frame is dropped. The forward transform is
// unnormalised, X[k] = sum_n w[n] x[t*hop + n] exp(-2 pi i k n / N).
Spectrogram stft(const Waveform& wave, const StftConfig& cfg = {});

// Weighted overlap-add with the same window, divided by the accumulated
// squared window. Output length is (frames - 1) * hop + fft_size. Samples
// where the accumulated squared window is below 1e-8 (sample 0 for the
// periodic windows) come back as zero.
Waveform istft(const Spectrogram& spec);

/// Spectrogram with magnitudes replaced and phases kept from `phase_source`.
Spectrogram with_magnitude(const Spectrogram& phase_source, const Tensor& magnitude);

Tensor magnitude(const Spectrogram& spec);

/// Energy of the STFT normalised so that, for a signal supported on the
/// fully-overlapped interior, it equals the time-domain energy sum x^2.
/// Each frame contributes (|X_0|^2 + |X_{N/2}|^2 + 2 sum_{0<k<N/2} |X_k|^2) / N.
double spectral_energy(const Spectrogram& spec);

double energy(std::span<const double> x);

/// clean + g * noise with g chosen so that the clean-to-scaled-noise power
/// ratio is exactly snr_db.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

/// 10 log10(sum s^2 / sum n^2). Throws InvalidInput when the noise has zero
/// energy (the ratio would be +inf).
double snr_db(const Waveform& signal, const Waveform& noise);
double snr_db(std::span<const double> signal, std::span<const double> noise);

inline constexpr double kSiSdrCapDb = 60.0;

/// Scale-invariant SDR in dB, capped at +60 dB.
double si_sdr(const Waveform& reference, const Waveform& estimate);
double si_sdr(std::span<const double> reference, std::span<const double> estimate);

/// Mean per-segment SNR over non-overlapping segments, each clamped to
/// [-10, 35] dB.
double segmental_snr(std::span<const double> reference, std::span<const double> estimate,
                     std::size_t segment = 256);

/// Full-length real FFT helpers used for noise shaping. Length n output of
/// inverse_rfft is normalised so inverse_rfft(rfft(x)) == x.
std::vector<std::complex<double>> rfft(std::span<const double> x);
std::vector<double> inverse_rfft(std::span<const std::complex<double>> spectrum,
                                 std::size_t n);

}  // namespace sad
