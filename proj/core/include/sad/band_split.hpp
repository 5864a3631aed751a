// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>

#include "sad/tensor.hpp"

namespace sad {

/// Frequency boundary between the speech-dominated low band [0, bin) and
/// the noise-dominated high band [bin, bins).
class DivisionPoint {
 public:
  DivisionPoint(std::size_t bin, std::size_t bins);

  /// Rounds fraction * bins half-up, then clamps into [1, bins - 1].
  static DivisionPoint from_fraction(double fraction, std::size_t bins);
  static DivisionPoint from_hz(double hz, std::size_t bins, int sample_rate);

  std::size_t bin() const { return bin_; }
  std::size_t bins() const { return bins_; }
  double fraction() const { return static_cast<double>(bin_) / static_cast<double>(bins_); }
  /// Frequency of the first high-band bin.
  double hz(int sample_rate) const;

  bool operator==(const DivisionPoint&) const = default;

 private:
  std::size_t bin_;
  std::size_t bins_;
};

/// Bin width in Hz for a one-sided spectrum with `bins` bins.
double bin_hz(std::size_t bins, int sample_rate);

struct OracleSettings {
  double search_lo_hz = 1000.0;
  double search_hi_hz = 6000.0;
  std::size_t smoothing_bins = 5;
  double floor_db = -80.0;
  double fallback_hz = 4000.0;
  int sample_rate = 16000;
};

struct OracleResult {
  DivisionPoint point;
  bool fallback = false;  // profile was all zero; point is the fallback bin
};

/// Per-bin profile used by the oracle: frame-averaged magnitude in dB
/// relative to its own maximum, floored, then smoothed with a centred moving
/// average (window truncated at the spectrum edges).
std::vector<double> oracle_profile(const Tensor& clean_mag, const OracleSettings& s = {});

/// Division-point label from a clean magnitude spectrogram [frames x bins].
/// The point is placed right after the steepest descent of the smoothed dB
/// profile: with d[b] = p[b+1] - p[b], the first b minimising d inside the
/// search window gives bin b + 1.
OracleResult dfkd_division_point(const Tensor& clean_mag, const OracleSettings& s = {});

struct BandPair {
  Tensor low;   // [frames x bin]
  Tensor high;  // [frames x (bins - bin)]
};

BandPair hard_split(const Tensor& mag, const DivisionPoint& m);

/// Concatenates low then high along the bin axis.
Tensor merge(const BandPair& pair);

/// High-band weight of bin b for a soft boundary at `fraction`:
/// logistic(((b + 0.5) / bins - fraction) / temperature). Bin centres are
/// used so that a fraction sitting on a bin edge m / bins splits exactly
/// between bins m - 1 and m as temperature goes to zero.
std::vector<double> soft_split_weights(std::size_t bins, double fraction, double temperature);

struct SoftSplit {
  Tensor low;   // (1 - w) * mag, full width
  Tensor high;  // w * mag, full width
  std::vector<double> weights;
  double fraction = 0.0;
  double temperature = 0.0;
};

SoftSplit soft_split(const Tensor& mag, double fraction, double temperature);

/// Gradient of a scalar loss with respect to the fraction, given the loss
/// gradients with respect to the soft split's outputs.
double soft_split_fraction_grad(const SoftSplit& split, const Tensor& mag,
                                const Tensor& grad_low, const Tensor& grad_high);

/// Gradient with respect to the split input magnitude.
Tensor soft_split_input_grad(const SoftSplit& split, const Tensor& grad_low,
                             const Tensor& grad_high);

enum class SplitKind { kHard, kSoft };

/// Routes band gradients back through a split. Throws ContractViolation for
/// hard splits, which have no gradient with respect to the division point.
double split_fraction_grad(SplitKind kind, const SoftSplit* split, const Tensor& mag,
                           const Tensor& grad_low, const Tensor& grad_high);

}  // namespace sad
