// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "sad/adam.hpp"
#include "sad/checkpoint.hpp"
#include "sad/data.hpp"
#include "sad/error.hpp"
#include "sad/training.hpp"
#include "test_util.hpp"

namespace sad {
namespace {

using nlohmann::json;

Utterance make_utterance(const std::string& id, std::uint64_t seed, double snr,
                         double duration = 1.0) {
  const Waveform clean = synth_speech(duration, seed);
  const Waveform noisy =
      mix_at_snr(clean, synth_noise(static_cast<NoiseKind>(seed % 3), duration, seed + 7), snr);
  Utterance u;
  u.id = id;
  u.clean_mag = magnitude(stft(clean));
  u.noisy_mag = magnitude(stft(noisy));
  u.snr_db = snr;
  u.oracle = dfkd_division_point(u.clean_mag);
  return u;
}

std::vector<Utterance> make_batch_utts() {
  return {make_utterance("a", 1, 3.0), make_utterance("b", 2, 12.0),
          make_utterance("c", 3, 18.0)};
}

Batch as_batch(const std::vector<Utterance>& u) {
  Batch b;
  for (const auto& x : u) b.items.push_back(&x);
  return b;
}

TrainConfig small_config() {
  TrainConfig c;
  c.crop_frames = 16;
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> read_log(const std::filesystem::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

TEST(Schedule, SupervisionActive) {
  EXPECT_TRUE(supervision_active(1, 10));
  EXPECT_TRUE(supervision_active(10, 10));
  EXPECT_FALSE(supervision_active(11, 10));
  EXPECT_FALSE(supervision_active(1, 0));
  EXPECT_THROW(supervision_active(0, 10), InvalidInput);
}

TEST(Schedule, ResolveSnrMax) {
  TrainConfig c;
  EXPECT_EQ(resolve_snr_max(c, 19.5), 19.5);
  c.snr_max_db = 20.0;
  EXPECT_EQ(resolve_snr_max(c, 19.5), 20.0);
  c.snr_max_db = 0.0;
  EXPECT_THROW(resolve_snr_max(c, 0.0), InvalidInput);
}

TEST(TrainStep, LossDecompositionHolds) {
  const auto utts = make_batch_utts();
  ModelBundle mb = ModelBundle::create(7, 257);
  const TrainConfig cfg = small_config();
  std::mt19937_64 rng(1);
  const StepRecord r = train_step(mb, as_batch(utts), cfg, 1, 20.0, rng);
  ASSERT_EQ(r.utterances.size(), 3u);
  EXPECT_TRUE(r.mean.supervised_m);
  for (const auto& u : r.utterances) {
    const LossBreakdown& l = u.parts;
    const double a = u.snr_db / 20.0;
    EXPECT_DOUBLE_EQ(l.alpha, a);
    EXPECT_NEAR(l.loss_d, l.loss_m + l.loss_ovl + a * l.loss_bak + (1 - a) * l.loss_sig, 1e-9);
    EXPECT_NEAR(l.loss_total, l.loss_g + cfg.gamma * l.loss_d, 1e-9);
    EXPECT_NEAR(l.loss_m, std::pow(u.m_hat_fraction - u.label_bin / 257.0, 2), 1e-12);
    EXPECT_LE(u.crop_offset + 16, utts[0].noisy_mag.dim(0));
  }
}

TEST(TrainStep, GoldenBreakdown) {
  const auto utts = make_batch_utts();
  ModelBundle mb = ModelBundle::create(7, 257);
  std::mt19937_64 rng(1);
  const StepRecord r = train_step(mb, as_batch(utts), small_config(), 1, 20.0, rng);
  EXPECT_NEAR(r.mean.loss_m, 0.0014919801805253095, 1e-9);
  EXPECT_NEAR(r.mean.loss_bak, 4.3155948332981549, 1e-9);
  EXPECT_NEAR(r.mean.loss_sig, 1.550924020382078, 1e-9);
  EXPECT_NEAR(r.mean.loss_ovl, 1.9720756375500355, 1e-9);
  EXPECT_NEAR(r.mean.loss_g, 60.960739431947985, 1e-9);
  EXPECT_NEAR(r.mean.loss_total, 65.837682332143089, 1e-9);
  EXPECT_EQ(mb.checksum(), 0xacac86646a1942f8ULL);
}

// With gamma = lambda_adv = 0 the generator update must equal a plain L1
// step computed here without any discriminator.
TEST(TrainStep, GammaZeroMatchesPureL1) {
  const auto utts = make_batch_utts();
  TrainConfig cfg = small_config();
  cfg.gamma = 0.0;
  cfg.lambda_adv = 0.0;
  for (int epoch : {1, 12}) {
    ModelBundle mb = ModelBundle::create(9, 257);
    nets::Generator baseline = mb.generator;
    AdamState st = mb.opt_generator;
    std::mt19937_64 rng(4);
    const StepRecord r = train_step(mb, as_batch(utts), cfg, epoch, 20.0, rng);

    baseline.params().zero_grad();
    for (std::size_t i = 0; i < utts.size(); ++i) {
      const std::size_t off = r.utterances[i].crop_offset;
      const std::size_t F = 257;
      Tensor noisy = make_matrix(16, F), clean = make_matrix(16, F);
      std::copy_n(utts[i].noisy_mag.data() + off * F, 16 * F, noisy.data());
      std::copy_n(utts[i].clean_mag.data() + off * F, 16 * F, clean.data());
      nets::Generator::Trace tr;
      const Tensor enh = baseline.forward(noisy, &tr);
      Tensor g = loss_generator_l1_grad(enh, clean);
      for (auto& v : g.values()) v /= 3.0;
      baseline.backward(tr, g);
    }
    AdamOptions o;
    o.learning_rate = cfg.learning_rate;
    adam_step(baseline.params(), st, o);

    const auto a = mb.generator.params().flat_values();
    const auto b = baseline.params().flat_values();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    EXPECT_LT(worst, 1e-12) << "epoch " << epoch;
  }
}

TEST(TrainStep, UnsupervisedPhaseDropsLossMButTrainsSplitter) {
  const auto utts = make_batch_utts();
  ModelBundle mb = ModelBundle::create(7, 257);
  const auto before = mb.splitter.params().flat_values();
  std::mt19937_64 rng(1);
  const StepRecord r = train_step(mb, as_batch(utts), small_config(), 11, 20.0, rng);
  EXPECT_FALSE(r.mean.supervised_m);
  EXPECT_EQ(r.mean.loss_m, 0.0);
  for (const auto& u : r.utterances) {
    const LossBreakdown& l = u.parts;
    EXPECT_FALSE(l.supervised_m);
    const double a = l.alpha;
    EXPECT_NEAR(l.loss_d, l.loss_ovl + a * l.loss_bak + (1 - a) * l.loss_sig, 1e-9);
  }
  const auto after = mb.splitter.params().flat_values();
  double delta = 0.0;
  for (std::size_t i = 0; i < after.size(); ++i) delta += std::abs(after[i] - before[i]);
  EXPECT_GT(delta, 0.0);
}

TEST(TrainStep, FullBandModeUsesOnlyD3) {
  const auto utts = make_batch_utts();
  ModelBundle mb = ModelBundle::create(7, 257);
  const auto d1 = mb.d_bak.params().checksum(), f = mb.splitter.params().checksum();
  TrainConfig cfg = small_config();
  cfg.discriminator_mode = DiscriminatorMode::kFullBand;
  std::mt19937_64 rng(1);
  const StepRecord r = train_step(mb, as_batch(utts), cfg, 1, 20.0, rng);
  for (const auto& u : r.utterances) {
    EXPECT_FALSE(u.has_split);
    EXPECT_EQ(u.parts.loss_d, u.parts.loss_ovl);
  }
  EXPECT_EQ(mb.d_bak.params().checksum(), d1);
  EXPECT_EQ(mb.splitter.params().checksum(), f);
}

TEST(TrainStep, FixedAlphaAndProseDirection) {
  const auto utts = make_batch_utts();
  ModelBundle mb = ModelBundle::create(7, 257);
  TrainConfig cfg = small_config();
  cfg.alpha_mode = AlphaMode::kFixed;
  cfg.bak_weight_direction = BakWeightDirection::kProse;
  std::mt19937_64 rng(1);
  const StepRecord r = train_step(mb, as_batch(utts), cfg, 1, 20.0, rng);
  for (const auto& u : r.utterances) {
    EXPECT_EQ(u.parts.alpha, 0.5);
    EXPECT_EQ(u.weights.bak, 0.5);
  }
}

TEST(TrainStep, NonFiniteLossNamesTheUtterance) {
  auto utts = make_batch_utts();
  utts[1].noisy_mag[5] = std::numeric_limits<double>::quiet_NaN();
  ModelBundle mb = ModelBundle::create(7, 257);
  std::mt19937_64 rng(1);
  TrainConfig cfg = small_config();
  cfg.crop_frames = 0;
  try {
    train_step(mb, as_batch(utts), cfg, 1, 20.0, rng);
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_EQ(e.utterance_id(), "b");
  }
}

TEST(TrainStep, Deterministic) {
  const auto utts = make_batch_utts();
  ModelBundle a = ModelBundle::create(7, 257), b = ModelBundle::create(7, 257);
  std::mt19937_64 ra(3), rb(3);
  const StepRecord x = train_step(a, as_batch(utts), small_config(), 2, 20.0, ra);
  const StepRecord y = train_step(b, as_batch(utts), small_config(), 2, 20.0, rb);
  EXPECT_EQ(step_record_json(x), step_record_json(y));
  EXPECT_EQ(a.checksum(), b.checksum());
}

TEST(DivisionStats, HardLimitOfTheSoftSplit) {
  const auto utts = make_batch_utts();
  const ModelBundle mb = ModelBundle::create(7, 257);
  const DivisionStats s = division_stats(mb, utts, small_config(), 1e-4);
  EXPECT_EQ(s.count, 3u);
  EXPECT_GT(s.mean_hz, 0.0);
  EXPECT_GE(s.mean_abs_err_fraction, 0.0);
  EXPECT_LE(s.soft_hard_max_dev, 0.5);
}

class RunFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("run");
    CorpusOptions o;
    o.n_utterances = 16;
    o.duration_s = 1.0;
    build_corpus(o, dir_->path() / "corpus");
    manifest_ = new Manifest(load_manifest(dir_->path() / "corpus" / "manifest.jsonl"));
  }
  static void TearDownTestSuite() {
    delete manifest_;
    delete dir_;
  }
  static TrainConfig cfg() {
    TrainConfig c;
    c.epochs = 3;
    c.k_supervised = 2;
    c.batch_size = 4;
    c.crop_frames = 16;
    c.pretrain_epochs = 2;
    c.pretrain_utterances = 5;
    return c;
  }
  static test::TempDir* dir_;
  static Manifest* manifest_;
};
test::TempDir* RunFixture::dir_ = nullptr;
Manifest* RunFixture::manifest_ = nullptr;

TEST_F(RunFixture, LogScheduleAndFiles) {
  RunOptions o;
  o.out_dir = dir_->path() / "a";
  const RunResult r = run_training(*manifest_, cfg(), o);
  ASSERT_TRUE(r.final.has_value());
  ASSERT_TRUE(r.pretrain.has_value());
  EXPECT_TRUE(std::filesystem::exists(o.out_dir / "final.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(o.out_dir / "checkpoints" / "epoch_003.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(o.out_dir / "checkpoints" / "pretrained.ckpt"));
  EXPECT_EQ(r.epochs.size(), 3u);
  int steps = 0;
  double prev_t = 1.0;
  for (const json& j : read_log(r.log_path)) {
    const int e = j.at("epoch");
    if (j.at("type") == "step") {
      ++steps;
      EXPECT_EQ(j.at("step"), steps);
      EXPECT_EQ(j.at("mean").at("supervised_m").get<bool>(), e <= 2);
      EXPECT_EQ(j.at("mean").at("loss_m").is_null(), e > 2);
      EXPECT_LE(j.at("temperature").get<double>(), prev_t);
      prev_t = j.at("temperature");
      for (const json& u : j.at("utterances")) {
        EXPECT_TRUE(u.contains("m_hat_bin"));
        EXPECT_TRUE(u.contains("m_hat_hz"));
        EXPECT_TRUE(u.contains("utterance_id"));
      }
    } else {
      EXPECT_EQ(j.at("type"), "epoch");
      EXPECT_EQ(j.at("supervised_m").get<bool>(), e <= 2);
      EXPECT_TRUE(j.at("val").contains("m_hat_mean_hz"));
      EXPECT_TRUE(j.at("val").contains("m_hat_std_hz"));
    }
  }
  EXPECT_GT(steps, 0);
  EXPECT_EQ(r.final->meta.at("variant"), "sad");
}

TEST_F(RunFixture, IdenticalRunsAndResume) {
  RunOptions a, b, c;
  a.out_dir = dir_->path() / "det_a";
  b.out_dir = dir_->path() / "det_b";
  c.out_dir = dir_->path() / "det_c";
  const RunResult ra = run_training(*manifest_, cfg(), a);
  const RunResult rb = run_training(*manifest_, cfg(), b);
  EXPECT_EQ(read_file(ra.log_path), read_file(rb.log_path));
  EXPECT_EQ(read_file(a.out_dir / "final.ckpt"), read_file(b.out_dir / "final.ckpt"));

  c.stop_after_epoch = 1;
  run_training(*manifest_, cfg(), c);
  EXPECT_FALSE(std::filesystem::exists(c.out_dir / "checkpoints" / "epoch_002.ckpt"));
  c.stop_after_epoch = 0;
  c.resume = c.out_dir / "checkpoints" / "epoch_001.ckpt";
  const RunResult rc = run_training(*manifest_, cfg(), c);
  EXPECT_EQ(rc.final->models.checksum(), ra.final->models.checksum());
  EXPECT_EQ(read_file(rc.log_path), read_file(ra.log_path));
  EXPECT_EQ(read_file(c.out_dir / "final.ckpt"), read_file(a.out_dir / "final.ckpt"));
}

TEST_F(RunFixture, ResumeRejectsOtherConfig) {
  RunOptions o;
  o.out_dir = dir_->path() / "other";
  o.stop_after_epoch = 1;
  run_training(*manifest_, cfg(), o);
  TrainConfig changed = cfg();
  changed.gamma = 0.5;
  o.resume = o.out_dir / "checkpoints" / "epoch_001.ckpt";
  EXPECT_THROW(run_training(*manifest_, changed, o), ConfigError);
}

// 50 utterances (2 s each) for the pretraining recipe.
class PretrainFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("pretrain");
    CorpusOptions o;
    o.n_utterances = 63;
    o.duration_s = 2.0;
    entries_ = new std::vector<ManifestEntry>(
        build_corpus(o, dir_->path() / "corpus").of(Split::kTrain));
  }
  static void TearDownTestSuite() {
    delete entries_;
    delete dir_;
  }
  static TrainConfig cfg(int levels) {
    TrainConfig c;
    c.pretrain_levels = levels;
    c.pretrain_epochs = 30;
    c.pretrain_utterances = 50;
    return c;
  }
  static test::TempDir* dir_;
  static std::vector<ManifestEntry>* entries_;
};
test::TempDir* PretrainFixture::dir_ = nullptr;
std::vector<ManifestEntry>* PretrainFixture::entries_ = nullptr;

TEST_F(PretrainFixture, CollapseCaseIsTrivial) {
  ASSERT_GE(entries_->size(), 50u);
  ModelBundle mb = ModelBundle::create(7, 257);
  const PretrainReport r = pretrain_discriminators(mb, *entries_, cfg(1));
  EXPECT_EQ(r.val_utterances, 10u);
  EXPECT_EQ(r.samples, 40u);
  EXPECT_LT(r.val_mse_bak, 0.05);
  EXPECT_LT(r.val_mse_sig, 0.05);
  EXPECT_LT(r.val_mse_ovl, 0.05);

  ModelBundle again = ModelBundle::create(7, 257);
  const PretrainReport r2 = pretrain_discriminators(again, *entries_, cfg(1));
  EXPECT_EQ(r2.val_mse_bak, r.val_mse_bak);
  EXPECT_EQ(r2.val_mse_sig, r.val_mse_sig);
  EXPECT_EQ(again.checksum(), mb.checksum());
  EXPECT_THROW(pretrain_discriminators(mb, {}, cfg(1)), InvalidInput);
}

TEST_F(PretrainFixture, FourLevelRecipe) {
  ModelBundle mb = ModelBundle::create(7, 257);
  const PretrainReport r = pretrain_discriminators(mb, *entries_, cfg(4));
  EXPECT_EQ(r.samples, 160u);
  EXPECT_LT(r.val_mse_bak, 0.25);
  for (double v : {r.val_mse_bak, r.val_mse_sig, r.val_mse_ovl}) EXPECT_TRUE(std::isfinite(v));
}

}  // namespace
}  // namespace sad
