// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/nets/params.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "sad/error.hpp"

namespace sad::nets {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t ModelParams::add(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  params_.push_back({std::move(name), std::move(shape), std::vector<double>(n, 0.0),
                     std::vector<double>(n, 0.0)});
  return params_.size() - 1;
}

const Param& ModelParams::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw InvalidInput("no parameter named " + name);
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void ModelParams::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

void ModelParams::scale_grad(double factor) {
  for (auto& p : params_)
    for (double& g : p.grad) g *= factor;
}

std::vector<double> ModelParams::flat_values() const {
  std::vector<double> out;
  out.reserve(count());
  for (const auto& p : params_) out.insert(out.end(), p.value.begin(), p.value.end());
  return out;
}

std::vector<double> ModelParams::flat_grads() const {
  std::vector<double> out;
  out.reserve(count());
  for (const auto& p : params_) out.insert(out.end(), p.grad.begin(), p.grad.end());
  return out;
}

void ModelParams::set_flat_values(std::span<const double> flat) {
  if (flat.size() != count()) throw InvalidInput("set_flat_values: size mismatch");
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), p.size(), p.value.begin());
    off += p.size();
  }
}

std::uint64_t ModelParams::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) h = fnv1a(p.value.data(), p.value.size() * sizeof(double), h);
  return h;
}

bool ModelParams::same_values(const ModelParams& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.shape != b.shape || a.value != b.value) return false;
  }
  return true;
}

double sum_of_squares(ModelParams& params, bool accumulate) {
  double s = 0.0;
  for (auto& p : params)
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p.value[i] * p.value[i];
      if (accumulate) p.grad[i] += 2.0 * p.value[i];
    }
  return s;
}

}  // namespace sad::nets
