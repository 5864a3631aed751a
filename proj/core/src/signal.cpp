// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "sad/error.hpp"

namespace sad {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per size under a lock and reused. FFTW_ESTIMATE
// keeps the chosen algorithm, and therefore the rounding, identical across
// runs.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, flags);
    p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in,
                                     flags | FFTW_DESTROY_INPUT);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void forward_real(std::span<const double> in, std::span<std::complex<double>> out) {
  const PlanPair p = plan_cache().get(in.size());
  std::vector<double> buf(in.begin(), in.end());
  fftw_execute_dft_r2c(p.forward, buf.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_real(std::span<const std::complex<double>> in, std::span<double> out) {
  const PlanPair p = plan_cache().get(out.size());
  std::vector<std::complex<double>> buf(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(buf.data()),
                       out.data());
}

constexpr double kWindowFloor = 1e-8;

}  // namespace

std::vector<double> make_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.fft_size);
  const double n = static_cast<double>(cfg.fft_size);
  for (std::size_t i = 0; i < cfg.fft_size; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    w[i] = cfg.window == WindowKind::kSqrtHann ? std::sqrt(hann) : hann;
  }
  return w;
}

void validate(const StftConfig& cfg) {
  if (cfg.fft_size < 2 || cfg.fft_size % 2 != 0)
    throw ConfigError("stft: fft_size must be even and >= 2");
  if (cfg.hop == 0 || cfg.hop > cfg.fft_size)
    throw ConfigError("stft: hop must be in [1, fft_size]");
  // Weighted overlap-add needs sum_t w^2[n - t*hop] to be constant.
  const auto w = make_window(cfg);
  std::vector<double> acc(cfg.hop, 0.0);
  for (std::size_t i = 0; i < cfg.fft_size; ++i) acc[i % cfg.hop] += w[i] * w[i];
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  if (*hi - *lo > 1e-9 * std::max(1.0, *hi))
    throw ConfigError("stft: squared window is not constant-overlap-add at this hop");
}

Spectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  validate(cfg);
  if (wave.sample_rate <= 0) throw InvalidInput("stft: sample_rate must be positive");
  if (wave.size() < cfg.fft_size)
    throw InvalidInput("stft: signal shorter than one analysis window");

  Spectrogram spec;
  spec.config = cfg;
  spec.sample_rate = wave.sample_rate;
  spec.bins = cfg.bins();
  spec.frames = 1 + (wave.size() - cfg.fft_size) / cfg.hop;
  spec.values.resize(spec.frames * spec.bins);

  const auto w = make_window(cfg);
  std::vector<double> frame(cfg.fft_size);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double* x = wave.samples.data() + t * cfg.hop;
    for (std::size_t n = 0; n < cfg.fft_size; ++n) frame[n] = x[n] * w[n];
    forward_real(frame, std::span(spec.values).subspan(t * spec.bins, spec.bins));
  }
  return spec;
}

Waveform istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config;
  validate(cfg);
  if (spec.bins != cfg.bins()) throw InvalidInput("istft: bins do not match config");

  Waveform out;
  out.sample_rate = spec.sample_rate;
  if (spec.frames == 0) return out;
  const std::size_t len = (spec.frames - 1) * cfg.hop + cfg.fft_size;
  out.samples.assign(len, 0.0);
  std::vector<double> norm(len, 0.0);

  const auto w = make_window(cfg);
  const double scale = 1.0 / static_cast<double>(cfg.fft_size);
  std::vector<double> frame(cfg.fft_size);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    inverse_real(std::span(spec.values).subspan(t * spec.bins, spec.bins), frame);
    double* y = out.samples.data() + t * cfg.hop;
    double* z = norm.data() + t * cfg.hop;
    for (std::size_t n = 0; n < cfg.fft_size; ++n) {
      y[n] += frame[n] * scale * w[n];
      z[n] += w[n] * w[n];
    }
  }
  for (std::size_t i = 0; i < len; ++i)
    out.samples[i] = norm[i] > kWindowFloor ? out.samples[i] / norm[i] : 0.0;
  return out;
}

Spectrogram with_magnitude(const Spectrogram& phase_source, const Tensor& mag) {
  if (mag.rank() != 2 || mag.dim(0) != phase_source.frames ||
      mag.dim(1) != phase_source.bins)
    throw InvalidInput("with_magnitude: shape mismatch");
  Spectrogram out = phase_source;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double m = std::abs(phase_source.values[i]);
    out.values[i] = m > 0.0 ? phase_source.values[i] * (mag[i] / m)
                            : std::complex<double>(mag[i], 0.0);
  }
  return out;
}

Tensor magnitude(const Spectrogram& spec) {
  Tensor m = make_matrix(spec.frames, spec.bins);
  for (std::size_t i = 0; i < spec.values.size(); ++i) m[i] = std::abs(spec.values[i]);
  return m;
}

double spectral_energy(const Spectrogram& spec) {
  const std::size_t nyq = spec.bins - 1;
  double total = 0.0;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    double e = std::norm(spec.at(t, 0)) + std::norm(spec.at(t, nyq));
    for (std::size_t k = 1; k < nyq; ++k) e += 2.0 * std::norm(spec.at(t, k));
    total += e;
  }
  return total / static_cast<double>(spec.config.fft_size);
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db_target) {
  if (clean.size() != noise.size()) throw InvalidInput("mix_at_snr: length mismatch");
  if (clean.sample_rate != noise.sample_rate)
    throw InvalidInput("mix_at_snr: sample rate mismatch");
  const double pc = energy(clean.samples);
  const double pn = energy(noise.samples);
  if (pc <= 0.0) throw InvalidInput("mix_at_snr: clean signal has zero energy");
  if (pn <= 0.0 && std::isfinite(snr_db_target))
    throw InvalidInput("mix_at_snr: noise has zero energy");
  const double g = std::isfinite(snr_db_target)
                       ? std::sqrt(pc / (pn * std::pow(10.0, snr_db_target / 10.0)))
                       : 0.0;
  Waveform out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += g * noise.samples[i];
  return out;
}

double snr_db(std::span<const double> signal, std::span<const double> noise) {
  if (signal.size() != noise.size()) throw InvalidInput("snr_db: length mismatch");
  const double pn = energy(noise);
  if (pn <= 0.0) throw InvalidInput("snr_db: noise has zero energy (SNR is +inf)");
  return 10.0 * std::log10(energy(signal) / pn);
}

double snr_db(const Waveform& signal, const Waveform& noise) {
  return snr_db(signal.samples, noise.samples);
}

double si_sdr(std::span<const double> ref, std::span<const double> est) {
  if (ref.size() != est.size()) throw InvalidInput("si_sdr: length mismatch");
  const double rr = energy(ref);
  if (rr <= 0.0) throw InvalidInput("si_sdr: reference has zero energy");
  double dot = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) dot += ref[i] * est[i];
  const double a = dot / rr;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = a * ref[i];
    const double e = est[i] - s;
    target += s * s;
    residual += e * e;
  }
  if (residual <= 0.0) return kSiSdrCapDb;
  if (target <= 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

double si_sdr(const Waveform& reference, const Waveform& estimate) {
  return si_sdr(reference.samples, estimate.samples);
}

double segmental_snr(std::span<const double> ref, std::span<const double> est,
                     std::size_t segment) {
  if (ref.size() != est.size()) throw InvalidInput("segmental_snr: length mismatch");
  if (segment == 0) throw InvalidInput("segmental_snr: segment must be positive");
  const std::size_t n_seg = ref.size() / segment;
  if (n_seg == 0) throw InvalidInput("segmental_snr: signal shorter than one segment");
  double total = 0.0;
  for (std::size_t s = 0; s < n_seg; ++s) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = s * segment; i < (s + 1) * segment; ++i) {
      sig += ref[i] * ref[i];
      const double d = ref[i] - est[i];
      err += d * d;
    }
    const double v = 10.0 * std::log10((sig + 1e-20) / (err + 1e-20));
    total += std::clamp(v, -10.0, 35.0);
  }
  return total / static_cast<double>(n_seg);
}

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  if (x.empty()) return {};
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  forward_real(x, out);
  return out;
}

std::vector<double> inverse_rfft(std::span<const std::complex<double>> spectrum,
                                 std::size_t n) {
  if (spectrum.size() != n / 2 + 1) throw InvalidInput("inverse_rfft: size mismatch");
  std::vector<double> out(n);
  inverse_real(spectrum, out);
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace sad
