// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sad/checkpoint.hpp"
#include "sad/config.hpp"
#include "sad/data.hpp"
#include "sad/losses.hpp"

namespace sad {

/// True iff the division-point label supervises F during `epoch` (1-based).
bool supervision_active(int epoch, int k_supervised);

StftConfig stft_config(const TrainConfig& cfg);
OracleSettings oracle_settings(const TrainConfig& cfg);

/// Resolves SNR_max: the config value when positive, else the corpus one.
double resolve_snr_max(const TrainConfig& cfg, double corpus_snr_max_db);

struct UtteranceStep {
  std::string id;
  double snr_db = 0.0;
  LossBreakdown parts;
  BandWeights weights;
  MosScores targets;
  MosScores predictions;
  bool has_split = true;  // false for the single full-band discriminator
  double m_hat_fraction = 0.0;
  std::size_t m_hat_bin = 0;
  double m_hat_hz = 0.0;
  std::size_t label_bin = 0;  // oracle division point of the clean utterance
  double label_hz = 0.0;
  std::size_t crop_offset = 0;
};

/// One alternating update. `mean` holds batch means of every field of the
/// generator-side pass; loss_d_step is the mean discriminator loss of the
/// discriminator-side pass that preceded it.
struct StepRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double temperature = 0.0;
  LossBreakdown mean;
  double loss_d_step = 0.0;
  std::vector<UtteranceStep> utterances;
};

/// Runs the discriminator-side step (D1-D3 and F minimise Loss_D, the
/// enhanced spectrum detached) and then the generator-side step (G
/// minimises Loss_G + gamma * Loss_D through the discriminators, the soft
/// split and F). Targets are proxy scores at the hard split of the oracle
/// label while supervised, of m_hat afterwards. Throws NonFiniteLoss.
StepRecord train_step(ModelBundle& models, const Batch& batch, const TrainConfig& cfg,
                      int epoch, double snr_max_db, std::mt19937_64& rng);

struct DivisionStats {
  std::size_t count = 0;
  double mean_hz = 0.0;
  double std_hz = 0.0;
  double mean_abs_err_fraction = 0.0;  // |m_hat - m| / bins against the oracle
  double soft_hard_max_dev = 0.0;      // max |soft weight - hard indicator|
};

/// m_hat on whole utterances from the current generator output.
DivisionStats division_stats(const ModelBundle& models, const std::vector<Utterance>& utts,
                             const TrainConfig& cfg, double temperature);

struct EpochRecord {
  int epoch = 0;
  double temperature = 0.0;
  bool supervised = false;
  std::int64_t steps = 0;
  double loss_total_mean = 0.0;
  DivisionStats train;  // m_hat seen during the epoch's steps
  DivisionStats val;    // after the epoch, on the validation split
  std::string checksum;
};

struct PretrainReport {
  std::size_t train_utterances = 0;
  std::size_t val_utterances = 0;
  std::size_t samples = 0;  // training variants per epoch
  double train_mse_bak = 0.0, train_mse_sig = 0.0, train_mse_ovl = 0.0;  // last epoch
  double val_mse_bak = 0.0, val_mse_sig = 0.0, val_mse_ovl = 0.0;
};

/// Regresses D1/D2/D3 on proxy scores of degraded copies of the clean
/// references: level 0 is the clean signal itself, the other levels
/// re-mix the utterance's noise at SNRs spread over [-5, 25] dB, every
/// second one with a random per-bin gain in [0.5, 1]. Bands come from a
/// soft split at the oracle point with a temperature drawn log-uniformly
/// from the schedule's range. The last 20% of the selected utterances are
/// held out for the reported validation MSE.
PretrainReport pretrain_discriminators(ModelBundle& models,
                                       const std::vector<ManifestEntry>& entries,
                                       const TrainConfig& cfg);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> init;    // start from these weights
  std::optional<std::filesystem::path> resume;  // continue this run
  int stop_after_epoch = 0;                     // > 0: stop early (for resume tests)
  std::function<void(const std::string&)> progress;
};

struct RunResult {
  std::optional<Checkpoint> final;
  std::filesystem::path log_path;
  std::filesystem::path checkpoint_path;
  std::vector<EpochRecord> epochs;
  std::optional<PretrainReport> pretrain;
};

/// Trains on the manifest's train split and tracks the val split. Writes
/// out_dir/train_log.ndjson (one "step" record per update, one "epoch"
/// record per epoch), out_dir/checkpoints/epoch_NNN.ckpt and
/// out_dir/final.ckpt. With cfg.pretrain and no init checkpoint the
/// discriminators are pretrained first.
RunResult run_training(const Manifest& manifest, const TrainConfig& cfg,
                       const RunOptions& opts);

/// JSON text of one log record (no trailing newline).
std::string step_record_json(const StepRecord& r);
std::string epoch_record_json(const EpochRecord& r);

}  // namespace sad
