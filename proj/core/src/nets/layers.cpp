// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/nets/layers.hpp"

#include <algorithm>
#include <cmath>

#include "sad/error.hpp"

namespace sad::nets {

void fill_uniform(std::vector<double>& v, double bound, std::mt19937_64& rng) {
  // Built from raw engine output so the values do not depend on the
  // standard library's distribution implementation.
  for (double& x : v) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x = (2.0 * u - 1.0) * bound;
  }
}

namespace {

// Output index range [lo, hi) along an axis such that in = out*stride + k - 1
// stays inside [0, n).
inline void valid_range(std::size_t n_in, std::size_t n_out, std::size_t stride,
                        std::size_t k, std::size_t& lo, std::size_t& hi) {
  lo = k == 0 ? 1 : 0;  // out*stride - 1 >= 0  <=>  out >= 1
  // out*stride + k - 1 <= n_in - 1  <=>  out <= (n_in - k) / stride
  if (n_in < k) {
    hi = 0;
    return;
  }
  hi = std::min(n_out, (n_in - k) / stride + 1);
  if (lo > hi) lo = hi;
}

}  // namespace

Tensor conv2d_forward(const Tensor& in, const std::vector<double>& weight,
                      const std::vector<double>& bias, std::size_t out_ch,
                      std::size_t stride_f) {
  if (in.rank() != 3) throw InvalidInput("conv2d: expected [C x T x F] input");
  const std::size_t cin = in.dim(0), T = in.dim(1), F = in.dim(2);
  if (weight.size() != out_ch * cin * 9) throw InvalidInput("conv2d: weight shape mismatch");
  const std::size_t Fo = conv_out_size(F, stride_f);
  Tensor out({out_ch, T, Fo});
  for (std::size_t co = 0; co < out_ch; ++co) {
    double* o = out.data() + co * T * Fo;
    std::fill(o, o + T * Fo, bias[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* x = in.data() + ci * T * F;
      const double* w = weight.data() + (co * cin + ci) * 9;
      for (std::size_t kt = 0; kt < 3; ++kt) {
        std::size_t t_lo, t_hi;
        valid_range(T, T, 1, kt, t_lo, t_hi);
        for (std::size_t kf = 0; kf < 3; ++kf) {
          std::size_t f_lo, f_hi;
          valid_range(F, Fo, stride_f, kf, f_lo, f_hi);
          const double wv = w[kt * 3 + kf];
          for (std::size_t t = t_lo; t < t_hi; ++t) {
            double* orow = o + t * Fo;
            const double* xrow = x + (t + kt - 1) * F + kf - 1;
            if (stride_f == 1) {
              for (std::size_t f = f_lo; f < f_hi; ++f) orow[f] += wv * xrow[f];
            } else {
              for (std::size_t f = f_lo; f < f_hi; ++f) orow[f] += wv * xrow[f * stride_f];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_backward(const Tensor& in, const std::vector<double>& weight,
                       const Tensor& grad_out, std::vector<double>& grad_weight,
                       std::vector<double>& grad_bias, std::size_t stride_f,
                       bool need_grad_in) {
  const std::size_t cin = in.dim(0), T = in.dim(1), F = in.dim(2);
  const std::size_t out_ch = grad_out.dim(0), Fo = grad_out.dim(2);
  Tensor grad_in;
  if (need_grad_in) grad_in = Tensor({cin, T, F});
  for (std::size_t co = 0; co < out_ch; ++co) {
    const double* g = grad_out.data() + co * T * Fo;
    double gb = 0.0;
    for (std::size_t i = 0; i < T * Fo; ++i) gb += g[i];
    grad_bias[co] += gb;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* x = in.data() + ci * T * F;
      const double* w = weight.data() + (co * cin + ci) * 9;
      double* gw = grad_weight.data() + (co * cin + ci) * 9;
      double* gx = need_grad_in ? grad_in.data() + ci * T * F : nullptr;
      for (std::size_t kt = 0; kt < 3; ++kt) {
        std::size_t t_lo, t_hi;
        valid_range(T, T, 1, kt, t_lo, t_hi);
        for (std::size_t kf = 0; kf < 3; ++kf) {
          std::size_t f_lo, f_hi;
          valid_range(F, Fo, stride_f, kf, f_lo, f_hi);
          const double wv = w[kt * 3 + kf];
          double acc = 0.0;
          for (std::size_t t = t_lo; t < t_hi; ++t) {
            const double* grow = g + t * Fo;
            const std::size_t off = (t + kt - 1) * F + kf - 1;
            const double* xrow = x + off;
            for (std::size_t f = f_lo; f < f_hi; ++f) acc += grow[f] * xrow[f * stride_f];
            if (gx != nullptr) {
              double* gxrow = gx + off;
              for (std::size_t f = f_lo; f < f_hi; ++f) gxrow[f * stride_f] += wv * grow[f];
            }
          }
          gw[kt * 3 + kf] += acc;
        }
      }
    }
  }
  return grad_in;
}

ConvBlock::ConvBlock(ModelParams& params, const std::string& prefix, std::size_t in_ch,
                     std::size_t out_ch, std::size_t stride_f)
    : in_ch_(in_ch), out_ch_(out_ch), stride_f_(stride_f) {
  weight_ = params.add(prefix + ".conv.weight", {out_ch, in_ch, 3, 3});
  bias_ = params.add(prefix + ".conv.bias", {out_ch});
  gain_ = params.add(prefix + ".norm.gain", {out_ch});
  offset_ = params.add(prefix + ".norm.offset", {out_ch});
}

void ConvBlock::init(ModelParams& params, std::mt19937_64& rng) const {
  fill_uniform(params[weight_].value, 1.0 / std::sqrt(9.0 * in_ch_), rng);
  std::fill(params[bias_].value.begin(), params[bias_].value.end(), 0.0);
  std::fill(params[gain_].value.begin(), params[gain_].value.end(), 1.0);
  std::fill(params[offset_].value.begin(), params[offset_].value.end(), 0.0);
}

Tensor ConvBlock::forward(const ModelParams& params, const Tensor& in, Trace* trace) const {
  if (in.rank() != 3 || in.dim(0) != in_ch_)
    throw InvalidInput("ConvBlock: expected " + std::to_string(in_ch_) + " input channels");
  Tensor y = conv2d_forward(in, params[weight_].value, params[bias_].value, out_ch_, stride_f_);
  const std::size_t C = out_ch_, P = y.dim(1) * y.dim(2);
  const auto& gain = params[gain_].value;
  const auto& offset = params[offset_].value;

  std::vector<double> mean(P, 0.0), var(P, 0.0), inv(P);
  for (std::size_t c = 0; c < C; ++c) {
    const double* v = y.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) mean[p] += v[p];
  }
  for (double& m : mean) m /= static_cast<double>(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double* v = y.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) {
      const double d = v[p] - mean[p];
      var[p] += d * d;
    }
  }
  for (std::size_t p = 0; p < P; ++p)
    inv[p] = 1.0 / std::sqrt(var[p] / static_cast<double>(C) + kNormEps);

  Tensor xhat(y.shape());
  Tensor out(y.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const double* v = y.data() + c * P;
    double* xh = xhat.data() + c * P;
    double* o = out.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) {
      xh[p] = (v[p] - mean[p]) * inv[p];
      o[p] = gain[c] * xh[p] + offset[c];
    }
  }
  if (trace != nullptr) {
    trace->input = in;
    trace->xhat = xhat;
    trace->inv_std = inv;
    trace->pre = out;
  }
  for (double& v : out.values()) v = v > 0.0 ? v : kLeakySlope * v;
  return out;
}

Tensor ConvBlock::backward(ModelParams& params, const Trace& tr, const Tensor& grad_out,
                           bool need_grad_in) const {
  const std::size_t C = out_ch_, P = tr.pre.size() / C;
  const auto& gain = params[gain_].value;
  auto& ggain = params[gain_].grad;
  auto& goffset = params[offset_].grad;

  // Through the rectifier and the affine part of the normalisation.
  Tensor dxhat(tr.pre.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const double* pre = tr.pre.data() + c * P;
    const double* g = grad_out.data() + c * P;
    const double* xh = tr.xhat.data() + c * P;
    double* d = dxhat.data() + c * P;
    double sg = 0.0, so = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      const double gy = pre[p] > 0.0 ? g[p] : kLeakySlope * g[p];
      sg += gy * xh[p];
      so += gy;
      d[p] = gy * gain[c];
    }
    ggain[c] += sg;
    goffset[c] += so;
  }

  // Normalisation over channels at each position.
  std::vector<double> sum_d(P, 0.0), sum_dx(P, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    const double* d = dxhat.data() + c * P;
    const double* xh = tr.xhat.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) {
      sum_d[p] += d[p];
      sum_dx[p] += d[p] * xh[p];
    }
  }
  Tensor dconv(tr.pre.shape());
  const double invC = 1.0 / static_cast<double>(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double* d = dxhat.data() + c * P;
    const double* xh = tr.xhat.data() + c * P;
    double* o = dconv.data() + c * P;
    for (std::size_t p = 0; p < P; ++p)
      o[p] = tr.inv_std[p] * (d[p] - invC * sum_d[p] - xh[p] * invC * sum_dx[p]);
  }
  return conv2d_backward(tr.input, params[weight_].value, dconv, params[weight_].grad,
                         params[bias_].grad, stride_f_, need_grad_in);
}

PredictBlock::PredictBlock(ModelParams& params, const std::string& prefix, std::size_t in_ch,
                           std::size_t hidden)
    : in_ch_(in_ch), hidden_(hidden) {
  w1_ = params.add(prefix + ".fc1.weight", {hidden, in_ch});
  b1_ = params.add(prefix + ".fc1.bias", {hidden});
  w2_ = params.add(prefix + ".fc2.weight", {1, hidden});
  b2_ = params.add(prefix + ".fc2.bias", {1});
}

void PredictBlock::init(ModelParams& params, std::mt19937_64& rng) const {
  fill_uniform(params[w1_].value, 1.0 / std::sqrt(static_cast<double>(in_ch_)), rng);
  std::fill(params[b1_].value.begin(), params[b1_].value.end(), 0.0);
  fill_uniform(params[w2_].value, 1.0 / std::sqrt(static_cast<double>(hidden_)), rng);
  params[b2_].value[0] = 0.0;
}

double PredictBlock::forward(const ModelParams& params, const Tensor& in, Trace* trace) const {
  if (in.rank() != 3 || in.dim(0) != in_ch_) throw InvalidInput("PredictBlock: bad input");
  const std::size_t P = in.dim(1) * in.dim(2);
  if (P == 0) throw InvalidInput("PredictBlock: empty input");
  std::vector<double> pooled(in_ch_, 0.0);
  for (std::size_t c = 0; c < in_ch_; ++c) {
    const double* v = in.data() + c * P;
    double s = 0.0;
    for (std::size_t p = 0; p < P; ++p) s += v[p];
    pooled[c] = s / static_cast<double>(P);
  }
  const auto& w1 = params[w1_].value;
  const auto& b1 = params[b1_].value;
  const auto& w2 = params[w2_].value;
  std::vector<double> pre(hidden_);
  double out = params[b2_].value[0];
  for (std::size_t h = 0; h < hidden_; ++h) {
    double s = b1[h];
    for (std::size_t c = 0; c < in_ch_; ++c) s += w1[h * in_ch_ + c] * pooled[c];
    pre[h] = s;
    out += w2[h] * (s > 0.0 ? s : kLeakySlope * s);
  }
  if (trace != nullptr) {
    trace->input_shape = in.shape();
    trace->pooled = std::move(pooled);
    trace->hidden_pre = std::move(pre);
  }
  return out;
}

Tensor PredictBlock::backward(ModelParams& params, const Trace& tr, double grad_out) const {
  const auto& w1 = params[w1_].value;
  const auto& w2 = params[w2_].value;
  auto& gw1 = params[w1_].grad;
  auto& gb1 = params[b1_].grad;
  auto& gw2 = params[w2_].grad;
  params[b2_].grad[0] += grad_out;

  std::vector<double> gpooled(in_ch_, 0.0);
  for (std::size_t h = 0; h < hidden_; ++h) {
    const double s = tr.hidden_pre[h];
    const double act = s > 0.0 ? s : kLeakySlope * s;
    gw2[h] += grad_out * act;
    const double gs = grad_out * w2[h] * (s > 0.0 ? 1.0 : kLeakySlope);
    gb1[h] += gs;
    for (std::size_t c = 0; c < in_ch_; ++c) {
      gw1[h * in_ch_ + c] += gs * tr.pooled[c];
      gpooled[c] += gs * w1[h * in_ch_ + c];
    }
  }
  Tensor grad_in(tr.input_shape);
  const std::size_t P = tr.input_shape[1] * tr.input_shape[2];
  for (std::size_t c = 0; c < in_ch_; ++c) {
    const double g = gpooled[c] / static_cast<double>(P);
    std::fill(grad_in.data() + c * P, grad_in.data() + (c + 1) * P, g);
  }
  return grad_in;
}

}  // namespace sad::nets
