// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "sad/adam.hpp"
#include "sad/nets/models.hpp"
#include "sad/random.hpp"

namespace sad {

/// G, F, D1 (high band / BAK), D2 (low band / SIG), D3 (full band / OVL)
/// and one optimizer state per model.
struct ModelBundle {
  nets::Generator generator;
  nets::Splitter splitter;
  nets::MetricDiscriminator d_bak;
  nets::MetricDiscriminator d_sig;
  nets::MetricDiscriminator d_ovl;
  AdamState opt_generator, opt_splitter, opt_bak, opt_sig, opt_ovl;

  /// Default-sized models, each seeded from its own stream derived from seed.
  static ModelBundle create(std::uint64_t seed, std::size_t bins);

  std::uint64_t checksum() const;
};

struct Checkpoint {
  ModelBundle models;
  int epoch = 0;  // last completed epoch; 0 after pretraining only
  std::uint64_t config_hash = 0;
  std::string rng_state;
  std::map<std::string, std::string> meta;
};

/// Little-endian binary container:
///   "SADCKPT\0", u32 version, u64 config_hash, i32 epoch, u64 bins,
///   str rng_state, u32 n_meta, n_meta x (str key, str value),
///   5 x model: str name, u32 n_params,
///              n_params x (str name, u32 rank, rank x u64 dim, f64 values),
///              u64 adam_step, u64 n, n x f64 m, n x f64 v.
/// str is u64 length followed by raw bytes.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Hex FNV-1a of the serialized bytes.
std::string checkpoint_id(const Checkpoint& ckpt);

}  // namespace sad
