// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sad::nets {

struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return value.size(); }
};

/// Named parameters in insertion order. Layers hold indices into this
/// collection, so iteration order is fixed by construction order.
class ModelParams {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  const Param& find(const std::string& name) const;

  /// Total number of scalars.
  std::size_t count() const;

  void zero_grad();
  void scale_grad(double factor);

  std::vector<double> flat_values() const;
  std::vector<double> flat_grads() const;
  void set_flat_values(std::span<const double> flat);

  /// FNV-1a over the raw bytes of all values, in order.
  std::uint64_t checksum() const;

  /// Same names, shapes and values (gradients ignored).
  bool same_values(const ModelParams& other) const;

 private:
  std::vector<Param> params_;
};

/// sum of squares of every parameter; when accumulate is set, adds its
/// gradient 2 * value into grad.
double sum_of_squares(ModelParams& params, bool accumulate);

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace sad::nets
