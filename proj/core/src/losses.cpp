// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/losses.hpp"

#include <algorithm>
#include <cmath>

#include "sad/error.hpp"

namespace sad {

double loss_m(double m_hat, double m_label) {
  const double d = m_label - m_hat;
  return d * d;
}

double loss_m_grad(double m_hat, double m_label) { return -2.0 * (m_label - m_hat); }

double score_loss(double pred, double target) {
  const double d = pred - target;
  return d * d;
}

double alpha(const SnrContext& ctx) {
  if (!(ctx.snr_max_db > 0.0)) throw InvalidInput("alpha: snr_max_db must be positive");
  const double snr = std::clamp(ctx.snr_db, 0.0, ctx.snr_max_db);
  return std::clamp(snr / ctx.snr_max_db, 0.0, 1.0);
}

BandWeights band_weights(double a, BakWeightDirection direction) {
  if (direction == BakWeightDirection::kFormula) return {a, 1.0 - a};
  return {1.0 - a, a};
}

double loss_discriminator(const LossBreakdown& parts, double a, bool include_m,
                          BakWeightDirection direction) {
  const BandWeights w = band_weights(a, direction);
  double d = parts.loss_ovl + w.bak * parts.loss_bak + w.sig * parts.loss_sig;
  if (include_m) d += parts.loss_m;
  return d;
}

double loss_generator(const Tensor& enhanced, const Tensor& clean,
                      const DiscriminatorPredictions& p, double lambda_adv) {
  if (enhanced.shape() != clean.shape()) throw InvalidInput("loss_generator: shape mismatch");
  if (enhanced.empty()) throw InvalidInput("loss_generator: empty input");
  double l1 = 0.0;
  for (std::size_t i = 0; i < enhanced.size(); ++i) l1 += std::abs(enhanced[i] - clean[i]);
  l1 /= static_cast<double>(enhanced.dim(0));
  double adv = 0.0;
  if (p.use_bak) adv += score_loss(p.bak, kBestScore);
  if (p.use_sig) adv += score_loss(p.sig, kBestScore);
  if (p.use_ovl) adv += score_loss(p.ovl, kBestScore);
  return l1 + lambda_adv * adv;
}

Tensor loss_generator_l1_grad(const Tensor& enhanced, const Tensor& clean) {
  Tensor g(enhanced.shape());
  const double n = static_cast<double>(enhanced.dim(0));
  for (std::size_t i = 0; i < enhanced.size(); ++i) {
    const double d = enhanced[i] - clean[i];
    g[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  return g;
}

double loss_total(double loss_g, double loss_d, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidInput("loss_total: gamma must be non-negative");
  return loss_g + gamma * loss_d;
}

}  // namespace sad
