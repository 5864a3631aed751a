// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "sad/nets/params.hpp"
#include "sad/tensor.hpp"

namespace sad::nets {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kNormEps = 1e-5;

/// Output width of a 3-wide, pad-1 convolution along an axis of size n.
inline std::size_t conv_out_size(std::size_t n, std::size_t stride) {
  return (n - 1) / stride + 1;
}

// 3x3 convolution, padding 1 on both axes, stride 1 over time and
// `stride_f` over frequency. in: [Cin x T x F], weight: [Cout x Cin x 3 x 3].
Tensor conv2d_forward(const Tensor& in, const std::vector<double>& weight,
                      const std::vector<double>& bias, std::size_t out_ch, std::size_t stride_f);

/// Accumulates into grad_weight / grad_bias; returns the input gradient
/// (empty when need_grad_in is false).
Tensor conv2d_backward(const Tensor& in, const std::vector<double>& weight,
                       const Tensor& grad_out, std::vector<double>& grad_weight,
                       std::vector<double>& grad_bias, std::size_t stride_f,
                       bool need_grad_in);

/// Conv -> per-position normalisation across channels with a learned
/// per-channel gain and offset -> leaky rectifier.
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(ModelParams& params, const std::string& prefix, std::size_t in_ch,
            std::size_t out_ch, std::size_t stride_f);

  struct Trace {
    Tensor input;
    Tensor xhat;                  // normalised conv output
    std::vector<double> inv_std;  // per position
    Tensor pre;                   // input to the rectifier
  };

  Tensor forward(const ModelParams& params, const Tensor& in, Trace* trace) const;
  Tensor backward(ModelParams& params, const Trace& trace, const Tensor& grad_out,
                  bool need_grad_in) const;
  void init(ModelParams& params, std::mt19937_64& rng) const;

  std::size_t out_channels() const { return out_ch_; }

 private:
  std::size_t in_ch_ = 0, out_ch_ = 0, stride_f_ = 1;
  std::size_t weight_ = 0, bias_ = 0, gain_ = 0, offset_ = 0;
};

/// Global average pooling over time and frequency followed by
/// affine -> leaky rectifier -> affine to one unsquashed scalar. The
/// pooling makes the output independent of the input's frame and bin count.
class PredictBlock {
 public:
  PredictBlock() = default;
  PredictBlock(ModelParams& params, const std::string& prefix, std::size_t in_ch,
               std::size_t hidden);

  struct Trace {
    std::vector<std::size_t> input_shape;
    std::vector<double> pooled;
    std::vector<double> hidden_pre;
  };

  double forward(const ModelParams& params, const Tensor& in, Trace* trace) const;
  Tensor backward(ModelParams& params, const Trace& trace, double grad_out) const;
  void init(ModelParams& params, std::mt19937_64& rng) const;

 private:
  std::size_t in_ch_ = 0, hidden_ = 0;
  std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;
};

void fill_uniform(std::vector<double>& v, double bound, std::mt19937_64& rng);

}  // namespace sad::nets
