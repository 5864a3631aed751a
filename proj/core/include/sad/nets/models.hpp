// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sad/nets/layers.hpp"
#include "sad/nets/params.hpp"
#include "sad/tensor.hpp"

namespace sad::nets {

/// Every model consumes log(magnitude + kFeatureEps).
inline constexpr double kFeatureEps = 1e-3;

Tensor log_features(const Tensor& mag);  // [T x F] -> [1 x T x F]

/// Mask generator: two ConvBlocks over the time-frequency plane and a
/// per-bin affine head. The head also sees the input log-magnitude
/// directly. enhanced = sigmoid(head) * noisy, so the output never exceeds
/// the input.
class Generator {
 public:
  struct Options {
    std::size_t bins = 257;
    std::size_t channels = 4;
    double head_bias_init = 1.0;
  };

  Generator(const Options& opts, std::uint64_t seed);
  explicit Generator(std::uint64_t seed) : Generator(Options{}, seed) {}

  struct Trace {
    Tensor mag;
    Tensor features;
    ConvBlock::Trace block1, block2;
    Tensor hidden;  // block2 output
    Tensor mask;
  };

  Tensor forward(const Tensor& noisy_mag, Trace* trace = nullptr) const;
  /// Accumulates parameter gradients for d loss / d enhanced.
  void backward(const Trace& trace, const Tensor& grad_enhanced);

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  std::size_t bins() const { return opts_.bins; }

 private:
  Options opts_;
  ModelParams params_;
  ConvBlock block1_, block2_;
  std::size_t head_w_ = 0, head_skip_ = 0, head_b_ = 0;
};

/// Frequency splitter. Noisy and enhanced log-magnitudes are stacked as two
/// channels and mapped to the division point as a fraction of the bin count.
class Splitter {
 public:
  struct Options {
    std::vector<std::size_t> channels = {4, 8, 16};
    std::size_t stride_f = 2;
    std::size_t hidden = 16;
  };

  Splitter(const Options& opts, std::uint64_t seed);
  explicit Splitter(std::uint64_t seed) : Splitter(Options{}, seed) {}

  struct Trace {
    Tensor noisy, enhanced;
    std::vector<ConvBlock::Trace> blocks;
    PredictBlock::Trace head;
    double fraction = 0.0;
  };

  struct InputGrads {
    Tensor noisy;
    Tensor enhanced;
  };

  /// Fraction in (0, 1).
  double forward(const Tensor& noisy_mag, const Tensor& enhanced_mag,
                 Trace* trace = nullptr) const;
  /// Accumulates parameter gradients; input gradients (in magnitude
  /// space) are returned when requested.
  InputGrads backward(const Trace& trace, double grad_fraction, bool need_input_grads);

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

 private:
  Options opts_;
  ModelParams params_;
  std::vector<ConvBlock> blocks_;
  PredictBlock head_;
};

/// Metric discriminator. Accepts a band of any width and returns a score
/// on the 1..5 scale.
class MetricDiscriminator {
 public:
  struct Options {
    std::vector<std::size_t> channels = {4, 8};
    std::size_t stride_f = 2;
    std::size_t hidden = 8;
  };

  MetricDiscriminator(const Options& opts, std::uint64_t seed);
  explicit MetricDiscriminator(std::uint64_t seed) : MetricDiscriminator(Options{}, seed) {}

  struct Trace {
    Tensor band;
    std::vector<ConvBlock::Trace> blocks;
    PredictBlock::Trace head;
    double score = 0.0;
  };

  double forward(const Tensor& band_mag, Trace* trace = nullptr) const;
  /// Returns d loss / d band magnitude when requested, else an empty tensor.
  Tensor backward(const Trace& trace, double grad_score, bool need_input_grad);

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

 private:
  Options opts_;
  ModelParams params_;
  std::vector<ConvBlock> blocks_;
  PredictBlock head_;
};

}  // namespace sad::nets
