// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sad/band_split.hpp"
#include "sad/tensor.hpp"

namespace sad {

/// Reference-based quality scores on the 1..5 opinion scale. Serve as
/// regression targets for the band discriminators.
struct MosScores {
  double bak = 1.0;
  double sig = 1.0;
  double ovl = 1.0;
};

struct MosCalibration {
  double bak_center_db = 15.0;
  double bak_scale_db = 10.0;
  double bak_eps = 1e-10;
  double sig_center = 0.5;
  double sig_scale = 0.2;
  double sig_eps = 1e-5;
  double ovl_bak_weight = 0.5;
};

double logistic(double x);

/// Residual-energy score: r = 10 log10((sum ref^2 + eps) / (sum (sig-ref)^2 + eps)),
/// mapped through 1 + 4 logistic((r - 15) / 10).
double bak_proxy(const Tensor& reference_band, const Tensor& signal_band,
                 const MosCalibration& cal = {});

/// Log-spectral-distance score: d = mean |log10(sig+eps) - log10(ref+eps)|,
/// mapped through 1 + 4 logistic((0.5 - d) / 0.2).
double sig_proxy(const Tensor& reference_band, const Tensor& signal_band,
                 const MosCalibration& cal = {});

double ovl_proxy(const Tensor& reference_full, const Tensor& signal_full,
                 const MosCalibration& cal = {});

/// BAK on the high bands, SIG on the low bands, OVL on the full band, all
/// from hard_split at m.
MosScores score_utterance(const Tensor& clean_mag, const Tensor& degraded_mag,
                          const DivisionPoint& m, const MosCalibration& cal = {});

}  // namespace sad
