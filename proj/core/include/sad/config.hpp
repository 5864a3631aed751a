// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sad/losses.hpp"

namespace sad {

enum class TemperatureDecay { kGeometric, kLinear };
enum class DiscriminatorMode {
  kScenarioAware,  // splitter + band discriminators + full-band discriminator
  kFullBand,       // one full-band discriminator, no split, no SNR weighting
};
enum class AlphaMode { kSnr, kFixed };

/// Every field maps to a key of the same name in the flat key=value config
/// file.
struct TrainConfig {
  int epochs = 15;
  int k_supervised = 10;
  int batch_size = 4;
  double learning_rate = 1e-3;
  double gamma = 1.0;
  double lambda_adv = 0.05;
  double temperature_start = 0.05;
  double temperature_end = 0.005;
  TemperatureDecay temperature_decay = TemperatureDecay::kGeometric;
  std::uint64_t seed = 7;
  BakWeightDirection bak_weight_direction = BakWeightDirection::kFormula;
  double snr_max_db = 0.0;  // <= 0: take the corpus maximum
  int crop_frames = 64;     // 0: whole utterances
  DiscriminatorMode discriminator_mode = DiscriminatorMode::kScenarioAware;
  AlphaMode alpha_mode = AlphaMode::kSnr;
  double fixed_alpha = 0.5;
  bool pretrain = true;
  int pretrain_epochs = 30;
  int pretrain_levels = 4;
  int pretrain_utterances = 50;  // 0: every training utterance
  double search_lo_hz = 1000.0;
  double search_hi_hz = 6000.0;
  int fft_size = 512;
  int hop = 256;

  /// Throws ConfigError on violated invariants.
  void validate() const;

  /// Canonical "key=value" lines in a fixed key order.
  std::string to_text() const;
  std::uint64_t hash() const;

  /// Ablation labels implied by the config ("no_weak_supervision",
  /// "no_disc_pretrain", "no_snr_weight", "single_fullband_discriminator").
  std::vector<std::string> ablations() const;
  std::string variant() const;
};

/// Applies "key=value" lines on top of `base`. Blank lines and lines
/// starting with '#' are ignored. Unknown keys and malformed values throw
/// ConfigError.
TrainConfig parse_config(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Temperature used during `epoch` (1-based) of a run with `epochs` epochs.
double temperature_at(const TrainConfig& cfg, int epoch);

std::string to_hex(std::uint64_t v);

}  // namespace sad
