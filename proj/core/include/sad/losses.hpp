// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "sad/mos.hpp"
#include "sad/tensor.hpp"

namespace sad {

/// Which band loss the SNR ratio alpha multiplies.
enum class BakWeightDirection {
  kFormula,  // alpha * Loss_BAK + (1 - alpha) * Loss_SIG, alpha = SNR / SNR_max
  kProse,    // (1 - alpha) * Loss_BAK + alpha * Loss_SIG: BAK dominates at low SNR
};

struct SnrContext {
  double snr_db = 0.0;
  double snr_max_db = 20.0;
};

/// All loss terms of one utterance (or their batch means).
struct LossBreakdown {
  double loss_m = 0.0;
  double loss_bak = 0.0;
  double loss_sig = 0.0;
  double loss_ovl = 0.0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double loss_total = 0.0;
  double alpha = 0.0;
  bool supervised_m = false;
};

/// Squared error of normalised division fractions.
double loss_m(double m_hat, double m_label);
/// d loss_m / d m_hat.
double loss_m_grad(double m_hat, double m_label);

/// Squared difference of a predicted and a target score.
double score_loss(double pred, double target);
inline double loss_bak(double pred, double target) { return score_loss(pred, target); }
inline double loss_sig(double pred, double target) { return score_loss(pred, target); }
inline double loss_ovl(double pred, double target) { return score_loss(pred, target); }

/// clamp(snr / snr_max, 0, 1). Throws InvalidInput unless snr_max > 0.
double alpha(const SnrContext& ctx);

struct BandWeights {
  double bak = 0.5;
  double sig = 0.5;
};

BandWeights band_weights(double alpha, BakWeightDirection direction);

/// Loss_m [if include_m] + Loss_OVL + w_bak * Loss_BAK + w_sig * Loss_SIG,
/// with the weights from band_weights().
double loss_discriminator(const LossBreakdown& parts, double alpha, bool include_m,
                          BakWeightDirection direction = BakWeightDirection::kFormula);

inline constexpr double kBestScore = 5.0;

struct DiscriminatorPredictions {
  double bak = kBestScore;
  double sig = kBestScore;
  double ovl = kBestScore;
  bool use_bak = true;
  bool use_sig = true;
  bool use_ovl = true;
};

/// L1 + lambda_adv * sum_i (pred_i - 5)^2 over the discriminators in use,
/// where L1 is |enhanced - clean| summed over bins and averaged over frames.
double loss_generator(const Tensor& enhanced_mag, const Tensor& clean_mag,
                      const DiscriminatorPredictions& preds, double lambda_adv);

/// d loss_generator / d enhanced for the L1 part (sign(e - c) / frames;
/// zero at equality).
Tensor loss_generator_l1_grad(const Tensor& enhanced_mag, const Tensor& clean_mag);

/// loss_g + gamma * loss_d. Throws InvalidInput for negative gamma.
double loss_total(double loss_g, double loss_d, double gamma);

}  // namespace sad
