// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/band_split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sad/error.hpp"

namespace sad {

DivisionPoint::DivisionPoint(std::size_t bin, std::size_t bins) : bin_(bin), bins_(bins) {
  if (bins < 2) throw InvalidInput("DivisionPoint: need at least two bins");
  if (bin < 1 || bin > bins - 1)
    throw InvalidInput("DivisionPoint: bin " + std::to_string(bin) + " outside [1, " +
                       std::to_string(bins - 1) + "]");
}

DivisionPoint DivisionPoint::from_fraction(double fraction, std::size_t bins) {
  if (!std::isfinite(fraction)) throw InvalidInput("DivisionPoint: non-finite fraction");
  const double raw = std::floor(fraction * static_cast<double>(bins) + 0.5);
  const double clamped = std::clamp(raw, 1.0, static_cast<double>(bins - 1));
  return {static_cast<std::size_t>(clamped), bins};
}

double bin_hz(std::size_t bins, int sample_rate) {
  return static_cast<double>(sample_rate) / (2.0 * static_cast<double>(bins - 1));
}

DivisionPoint DivisionPoint::from_hz(double hz, std::size_t bins, int sample_rate) {
  const double raw = std::floor(hz / bin_hz(bins, sample_rate) + 0.5);
  const double clamped = std::clamp(raw, 1.0, static_cast<double>(bins - 1));
  return {static_cast<std::size_t>(clamped), bins};
}

double DivisionPoint::hz(int sample_rate) const {
  return static_cast<double>(bin_) * bin_hz(bins_, sample_rate);
}

std::vector<double> oracle_profile(const Tensor& mag, const OracleSettings& s) {
  if (mag.rank() != 2 || mag.dim(0) == 0 || mag.dim(1) < 2)
    throw InvalidInput("oracle: expected a non-empty [frames x bins] matrix");
  const std::size_t frames = mag.dim(0), bins = mag.dim(1);
  std::vector<double> avg(bins, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < bins; ++b) {
      const double v = mag.at(t, b);
      if (v < 0.0 || !std::isfinite(v))
        throw InvalidInput("oracle: magnitudes must be finite and non-negative");
      avg[b] += v;
    }
  for (double& v : avg) v /= static_cast<double>(frames);

  const double peak = *std::max_element(avg.begin(), avg.end());
  std::vector<double> db(bins, s.floor_db);
  if (peak > 0.0)
    for (std::size_t b = 0; b < bins; ++b)
      if (avg[b] > 0.0) db[b] = std::max(s.floor_db, 20.0 * std::log10(avg[b] / peak));

  const std::size_t half = s.smoothing_bins / 2;
  std::vector<double> smooth(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b >= half ? b - half : 0;
    const std::size_t hi = std::min(bins - 1, b + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += db[j];
    smooth[b] = acc / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

OracleResult dfkd_division_point(const Tensor& mag, const OracleSettings& s) {
  if (mag.rank() != 2 || mag.dim(1) < 2) throw InvalidInput("oracle: bad magnitude shape");
  const std::size_t bins = mag.dim(1);
  const double nyquist = s.sample_rate / 2.0;
  if (!(s.search_lo_hz > 0.0 && s.search_lo_hz < s.search_hi_hz && s.search_hi_hz < nyquist))
    throw InvalidInput("oracle: search window must lie inside (0, Nyquist)");

  const auto fallback = [&] {
    return OracleResult{DivisionPoint::from_hz(s.fallback_hz, bins, s.sample_rate), true};
  };
  bool any = false;
  for (double v : mag.values()) any = any || v != 0.0;
  if (!any) return fallback();

  const auto profile = oracle_profile(mag, s);
  const double hz = bin_hz(bins, s.sample_rate);
  // Candidate boundaries b+1 must fall inside the window.
  const auto first = static_cast<std::size_t>(std::ceil(s.search_lo_hz / hz));
  const auto last = std::min(bins - 1, static_cast<std::size_t>(std::floor(s.search_hi_hz / hz)));
  std::size_t best = first;
  double best_slope = std::numeric_limits<double>::infinity();
  for (std::size_t m = std::max<std::size_t>(first, 1); m <= last; ++m) {
    const double slope = profile[m] - profile[m - 1];
    if (slope < best_slope) {
      best_slope = slope;
      best = m;
    }
  }
  return {DivisionPoint(best, bins), false};
}

BandPair hard_split(const Tensor& mag, const DivisionPoint& m) {
  if (mag.rank() != 2) throw InvalidInput("hard_split: expected a matrix");
  const std::size_t frames = mag.dim(0), bins = mag.dim(1);
  if (m.bins() != bins) throw InvalidInput("hard_split: division point bin count mismatch");
  const std::size_t cut = m.bin();
  BandPair out{make_matrix(frames, cut), make_matrix(frames, bins - cut)};
  for (std::size_t t = 0; t < frames; ++t) {
    const double* row = mag.data() + t * bins;
    std::copy(row, row + cut, out.low.data() + t * cut);
    std::copy(row + cut, row + bins, out.high.data() + t * (bins - cut));
  }
  return out;
}

Tensor merge(const BandPair& pair) {
  if (pair.low.rank() != 2 || pair.high.rank() != 2 || pair.low.dim(0) != pair.high.dim(0))
    throw InvalidInput("merge: band frame counts differ");
  const std::size_t frames = pair.low.dim(0);
  const std::size_t nl = pair.low.dim(1), nh = pair.high.dim(1);
  Tensor out = make_matrix(frames, nl + nh);
  for (std::size_t t = 0; t < frames; ++t) {
    std::copy_n(pair.low.data() + t * nl, nl, out.data() + t * (nl + nh));
    std::copy_n(pair.high.data() + t * nh, nh, out.data() + t * (nl + nh) + nl);
  }
  return out;
}

std::vector<double> soft_split_weights(std::size_t bins, double fraction, double temperature) {
  if (!(temperature > 0.0)) throw InvalidInput("soft_split: temperature must be positive");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidInput("soft_split: fraction must lie in (0, 1)");
  std::vector<double> w(bins);
  const double n = static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double z = ((static_cast<double>(b) + 0.5) / n - fraction) / temperature;
    w[b] = 1.0 / (1.0 + std::exp(-z));
  }
  return w;
}

SoftSplit soft_split(const Tensor& mag, double fraction, double temperature) {
  if (mag.rank() != 2) throw InvalidInput("soft_split: expected a matrix");
  const std::size_t frames = mag.dim(0), bins = mag.dim(1);
  SoftSplit out;
  out.weights = soft_split_weights(bins, fraction, temperature);
  out.fraction = fraction;
  out.temperature = temperature;
  out.low = make_matrix(frames, bins);
  out.high = make_matrix(frames, bins);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < bins; ++b) {
      const double v = mag.at(t, b);
      const double h = out.weights[b] * v;
      out.high.at(t, b) = h;
      out.low.at(t, b) = v - h;  // low + high == mag up to one rounding
    }
  return out;
}

double soft_split_fraction_grad(const SoftSplit& split, const Tensor& mag,
                                const Tensor& grad_low, const Tensor& grad_high) {
  const std::size_t frames = mag.dim(0), bins = mag.dim(1);
  double g = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double w = split.weights[b];
    const double dw_df = -w * (1.0 - w) / split.temperature;
    double acc = 0.0;
    for (std::size_t t = 0; t < frames; ++t)
      acc += (grad_high.at(t, b) - grad_low.at(t, b)) * mag.at(t, b);
    g += acc * dw_df;
  }
  return g;
}

Tensor soft_split_input_grad(const SoftSplit& split, const Tensor& grad_low,
                             const Tensor& grad_high) {
  const std::size_t frames = grad_low.dim(0), bins = grad_low.dim(1);
  Tensor g = make_matrix(frames, bins);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < bins; ++b) {
      const double w = split.weights[b];
      g.at(t, b) = w * grad_high.at(t, b) + (1.0 - w) * grad_low.at(t, b);
    }
  return g;
}

double split_fraction_grad(SplitKind kind, const SoftSplit* split, const Tensor& mag,
                           const Tensor& grad_low, const Tensor& grad_high) {
  if (kind == SplitKind::kHard || split == nullptr)
    throw ContractViolation("gradient requested through a hard band split; use soft_split");
  return soft_split_fraction_grad(*split, mag, grad_low, grad_high);
}

}  // namespace sad
