// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/nets/models.hpp"

#include <cmath>
#include <random>

#include "sad/error.hpp"
#include "sad/mos.hpp"

namespace sad::nets {

namespace {

void check_matrix(const Tensor& m, const char* who) {
  if (m.rank() != 2 || m.dim(0) == 0 || m.dim(1) == 0)
    throw InvalidInput(std::string(who) + ": expected a non-empty [frames x bins] matrix");
}

// d log(mag + eps) / d mag applied to a feature-space gradient.
Tensor feature_grad_to_magnitude(const Tensor& mag, const double* grad_feat) {
  Tensor g(mag.shape());
  for (std::size_t i = 0; i < mag.size(); ++i) g[i] = grad_feat[i] / (mag[i] + kFeatureEps);
  return g;
}

}  // namespace

Tensor log_features(const Tensor& mag) {
  Tensor f({1, mag.dim(0), mag.dim(1)});
  for (std::size_t i = 0; i < mag.size(); ++i) f[i] = std::log(mag[i] + kFeatureEps);
  return f;
}

// ---------------------------------------------------------------- Generator

Generator::Generator(const Options& opts, std::uint64_t seed) : opts_(opts) {
  block1_ = ConvBlock(params_, "block1", 1, opts.channels, 1);
  block2_ = ConvBlock(params_, "block2", opts.channels, opts.channels, 1);
  head_w_ = params_.add("head.weight", {opts.bins, opts.channels});
  head_skip_ = params_.add("head.skip", {opts.bins});
  head_b_ = params_.add("head.bias", {opts.bins});

  std::mt19937_64 rng(seed);
  block1_.init(params_, rng);
  block2_.init(params_, rng);
  fill_uniform(params_[head_w_].value, 1.0 / std::sqrt(static_cast<double>(opts.channels)), rng);
  std::fill(params_[head_b_].value.begin(), params_[head_b_].value.end(), opts.head_bias_init);
}

Tensor Generator::forward(const Tensor& noisy, Trace* trace) const {
  check_matrix(noisy, "generator");
  if (noisy.dim(1) != opts_.bins)
    throw InvalidInput("generator: built for " + std::to_string(opts_.bins) + " bins, got " +
                       std::to_string(noisy.dim(1)));
  const std::size_t T = noisy.dim(0), F = noisy.dim(1), C = opts_.channels;
  Tensor feat = log_features(noisy);
  Trace local;
  Trace& tr = trace != nullptr ? *trace : local;
  Tensor h1 = block1_.forward(params_, feat, trace != nullptr ? &tr.block1 : nullptr);
  Tensor h2 = block2_.forward(params_, h1, trace != nullptr ? &tr.block2 : nullptr);

  const auto& w = params_[head_w_].value;
  const auto& skip = params_[head_skip_].value;
  const auto& b = params_[head_b_].value;
  Tensor mask = make_matrix(T, F);
  Tensor out = make_matrix(T, F);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) {
      double z = b[f] + skip[f] * feat[t * F + f];
      for (std::size_t c = 0; c < C; ++c) z += w[f * C + c] * h2.at(c, t, f);
      const double m = logistic(z);
      mask.at(t, f) = m;
      out.at(t, f) = m * noisy.at(t, f);
    }
  if (trace != nullptr) {
    tr.mag = noisy;
    tr.features = std::move(feat);
    tr.hidden = std::move(h2);
    tr.mask = std::move(mask);
  }
  return out;
}

void Generator::backward(const Trace& tr, const Tensor& grad_enh) {
  const std::size_t T = tr.mag.dim(0), F = tr.mag.dim(1), C = opts_.channels;
  const auto& w = params_[head_w_].value;
  auto& gw = params_[head_w_].grad;
  auto& gskip = params_[head_skip_].grad;
  auto& gb = params_[head_b_].grad;
  Tensor gh({C, T, F});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) {
      const double m = tr.mask.at(t, f);
      const double gz = grad_enh.at(t, f) * tr.mag.at(t, f) * m * (1.0 - m);
      gb[f] += gz;
      gskip[f] += gz * tr.features[t * F + f];
      for (std::size_t c = 0; c < C; ++c) {
        gw[f * C + c] += gz * tr.hidden.at(c, t, f);
        gh.at(c, t, f) = gz * w[f * C + c];
      }
    }
  Tensor g1 = block2_.backward(params_, tr.block2, gh, true);
  block1_.backward(params_, tr.block1, g1, false);
}

// ----------------------------------------------------------------- Splitter

Splitter::Splitter(const Options& opts, std::uint64_t seed) : opts_(opts) {
  if (opts.channels.empty()) throw ConfigError("splitter: need at least one ConvBlock");
  std::size_t in = 2;
  for (std::size_t i = 0; i < opts.channels.size(); ++i) {
    blocks_.emplace_back(params_, "block" + std::to_string(i + 1), in, opts.channels[i],
                         opts.stride_f);
    in = opts.channels[i];
  }
  head_ = PredictBlock(params_, "predict", in, opts.hidden);
  std::mt19937_64 rng(seed);
  for (const auto& b : blocks_) b.init(params_, rng);
  head_.init(params_, rng);
}

double Splitter::forward(const Tensor& noisy, const Tensor& enhanced, Trace* trace) const {
  check_matrix(noisy, "splitter");
  if (noisy.shape() != enhanced.shape()) throw InvalidInput("splitter: input shape mismatch");
  const std::size_t T = noisy.dim(0), F = noisy.dim(1);
  Tensor x({2, T, F});
  for (std::size_t i = 0; i < T * F; ++i) {
    x[i] = std::log(noisy[i] + kFeatureEps);
    x[T * F + i] = std::log(enhanced[i] + kFeatureEps);
  }
  if (trace != nullptr) trace->blocks.resize(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    x = blocks_[i].forward(params_, x, trace != nullptr ? &trace->blocks[i] : nullptr);
  const double z = head_.forward(params_, x, trace != nullptr ? &trace->head : nullptr);
  const double frac = logistic(z);
  if (trace != nullptr) {
    trace->noisy = noisy;
    trace->enhanced = enhanced;
    trace->fraction = frac;
  }
  return frac;
}

Splitter::InputGrads Splitter::backward(const Trace& tr, double grad_fraction,
                                        bool need_input_grads) {
  const double gz = grad_fraction * tr.fraction * (1.0 - tr.fraction);
  Tensor g = head_.backward(params_, tr.head, gz);
  for (std::size_t i = blocks_.size(); i-- > 0;)
    g = blocks_[i].backward(params_, tr.blocks[i], g, need_input_grads || i > 0);
  InputGrads out;
  if (need_input_grads) {
    const std::size_t P = tr.noisy.size();
    out.noisy = feature_grad_to_magnitude(tr.noisy, g.data());
    out.enhanced = feature_grad_to_magnitude(tr.enhanced, g.data() + P);
  }
  return out;
}

// ------------------------------------------------------ MetricDiscriminator

MetricDiscriminator::MetricDiscriminator(const Options& opts, std::uint64_t seed)
    : opts_(opts) {
  if (opts.channels.empty()) throw ConfigError("discriminator: need at least one ConvBlock");
  std::size_t in = 1;
  for (std::size_t i = 0; i < opts.channels.size(); ++i) {
    blocks_.emplace_back(params_, "block" + std::to_string(i + 1), in, opts.channels[i],
                         opts.stride_f);
    in = opts.channels[i];
  }
  head_ = PredictBlock(params_, "predict", in, opts.hidden);
  std::mt19937_64 rng(seed);
  for (const auto& b : blocks_) b.init(params_, rng);
  head_.init(params_, rng);
}

double MetricDiscriminator::forward(const Tensor& band, Trace* trace) const {
  if (band.rank() != 2 || band.dim(0) == 0 || band.dim(1) == 0)
    throw InvalidInput("discriminator: empty band");
  Tensor x = log_features(band);
  if (trace != nullptr) trace->blocks.resize(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    x = blocks_[i].forward(params_, x, trace != nullptr ? &trace->blocks[i] : nullptr);
  const double z = head_.forward(params_, x, trace != nullptr ? &trace->head : nullptr);
  const double score = 1.0 + 4.0 * logistic(z);
  if (trace != nullptr) {
    trace->band = band;
    trace->score = score;
  }
  return score;
}

Tensor MetricDiscriminator::backward(const Trace& tr, double grad_score, bool need_input_grad) {
  const double s = (tr.score - 1.0) / 4.0;
  const double gz = grad_score * 4.0 * s * (1.0 - s);
  Tensor g = head_.backward(params_, tr.head, gz);
  for (std::size_t i = blocks_.size(); i-- > 0;)
    g = blocks_[i].backward(params_, tr.blocks[i], g, need_input_grad || i > 0);
  if (!need_input_grad) return {};
  return feature_grad_to_magnitude(tr.band, g.data());
}

}  // namespace sad::nets
