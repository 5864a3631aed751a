// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sad/error.hpp"
#include "sad/mos.hpp"
#include "sad/random.hpp"

namespace sad {

namespace fs = std::filesystem;
using nlohmann::json;

bool supervision_active(int epoch, int k_supervised) {
  if (epoch < 1) throw InvalidInput("supervision_active: epochs are 1-based");
  return epoch <= k_supervised;
}

StftConfig stft_config(const TrainConfig& cfg) {
  StftConfig s;
  s.fft_size = static_cast<std::size_t>(cfg.fft_size);
  s.hop = static_cast<std::size_t>(cfg.hop);
  return s;
}

OracleSettings oracle_settings(const TrainConfig& cfg) {
  OracleSettings o;
  o.search_lo_hz = cfg.search_lo_hz;
  o.search_hi_hz = cfg.search_hi_hz;
  return o;
}

double resolve_snr_max(const TrainConfig& cfg, double corpus_snr_max_db) {
  const double v = cfg.snr_max_db > 0.0 ? cfg.snr_max_db : corpus_snr_max_db;
  if (!(v > 0.0))
    throw InvalidInput("SNR_max must be positive; set snr_max_db in the config");
  return v;
}

namespace {

constexpr double kFractionGuard = 1e-6;

Tensor crop_frames(const Tensor& m, std::size_t offset, std::size_t len) {
  const std::size_t F = m.dim(1);
  Tensor out = make_matrix(len, F);
  std::copy_n(m.data() + offset * F, len * F, out.data());
  return out;
}

double guarded(double fraction) {
  return std::clamp(fraction, kFractionGuard, 1.0 - kFractionGuard);
}

bool full_band(const TrainConfig& cfg) {
  return cfg.discriminator_mode == DiscriminatorMode::kFullBand;
}

double utterance_alpha(const TrainConfig& cfg, double snr_db, double snr_max_db) {
  if (cfg.alpha_mode == AlphaMode::kFixed) return cfg.fixed_alpha;
  return alpha({snr_db, snr_max_db});
}

// Everything one utterance contributes to either half of a step.
struct Pass {
  Tensor noisy, clean, enhanced;
  nets::Generator::Trace g_trace;
  nets::Splitter::Trace f_trace;
  nets::MetricDiscriminator::Trace bak_trace, sig_trace, ovl_trace;
  SoftSplit split;
  DivisionPoint target_point{1, 2};
  UtteranceStep rec;
};

// Forward through G, F, the split and the discriminators; fills losses.
void forward_pass(const ModelBundle& mb, Pass& p, const Utterance& u, const TrainConfig& cfg,
                  bool supervised, double temperature, double snr_max_db, bool trace_g) {
  const std::size_t bins = p.noisy.dim(1);
  const int sr = kCanonicalSampleRate;
  p.enhanced = mb.generator.forward(p.noisy, trace_g ? &p.g_trace : nullptr);
  UtteranceStep& r = p.rec;
  r.id = u.id;
  r.snr_db = u.snr_db;
  r.label_bin = u.oracle.point.bin();
  r.label_hz = u.oracle.point.hz(sr);
  LossBreakdown& parts = r.parts;
  parts.supervised_m = supervised;
  parts.alpha = utterance_alpha(cfg, u.snr_db, snr_max_db);

  if (full_band(cfg)) {
    r.has_split = false;
    r.targets = score_utterance(p.clean, p.enhanced, u.oracle.point);
    r.predictions.ovl = mb.d_ovl.forward(p.enhanced, &p.ovl_trace);
    parts.loss_ovl = loss_ovl(r.predictions.ovl, r.targets.ovl);
    parts.loss_d = parts.loss_ovl;
    r.weights = {0.0, 0.0};
    return;
  }

  const double frac = mb.splitter.forward(p.noisy, p.enhanced, &p.f_trace);
  if (!std::isfinite(frac))
    throw NonFiniteLoss("non-finite division point for utterance " + u.id, u.id);
  const DivisionPoint m_hat = DivisionPoint::from_fraction(frac, bins);
  r.m_hat_fraction = frac;
  r.m_hat_bin = m_hat.bin();
  r.m_hat_hz = m_hat.hz(sr);
  p.target_point = supervised ? u.oracle.point : m_hat;
  r.targets = score_utterance(p.clean, p.enhanced, p.target_point);

  p.split = soft_split(p.enhanced, guarded(frac), temperature);
  r.predictions.bak = mb.d_bak.forward(p.split.high, &p.bak_trace);
  r.predictions.sig = mb.d_sig.forward(p.split.low, &p.sig_trace);
  r.predictions.ovl = mb.d_ovl.forward(p.enhanced, &p.ovl_trace);
  parts.loss_bak = loss_bak(r.predictions.bak, r.targets.bak);
  parts.loss_sig = loss_sig(r.predictions.sig, r.targets.sig);
  parts.loss_ovl = loss_ovl(r.predictions.ovl, r.targets.ovl);
  if (supervised) parts.loss_m = loss_m(frac, u.oracle.point.fraction());
  r.weights = band_weights(parts.alpha, cfg.bak_weight_direction);
  parts.loss_d = loss_discriminator(parts, parts.alpha, supervised, cfg.bak_weight_direction);
}

void check_finite(const Pass& p) {
  const LossBreakdown& l = p.rec.parts;
  for (double v : {l.loss_m, l.loss_bak, l.loss_sig, l.loss_ovl, l.loss_d, l.loss_g,
                   l.loss_total})
    if (!std::isfinite(v))
      throw NonFiniteLoss("non-finite loss for utterance " + p.rec.id, p.rec.id);
}

void accumulate(LossBreakdown& acc, const LossBreakdown& l, double scale) {
  acc.loss_m += scale * l.loss_m;
  acc.loss_bak += scale * l.loss_bak;
  acc.loss_sig += scale * l.loss_sig;
  acc.loss_ovl += scale * l.loss_ovl;
  acc.loss_d += scale * l.loss_d;
  acc.loss_g += scale * l.loss_g;
  acc.loss_total += scale * l.loss_total;
  acc.alpha += scale * l.alpha;
}

Tensor add(Tensor a, const Tensor& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

}  // namespace

StepRecord train_step(ModelBundle& mb, const Batch& batch, const TrainConfig& cfg, int epoch,
                      double snr_max_db, std::mt19937_64& rng) {
  if (batch.items.empty()) throw InvalidInput("train_step: empty batch");
  const bool supervised = supervision_active(epoch, cfg.k_supervised);
  const double temperature = temperature_at(cfg, epoch);
  const double scale = 1.0 / static_cast<double>(batch.items.size());
  const bool fb = full_band(cfg);
  AdamOptions adam;
  adam.learning_rate = cfg.learning_rate;

  StepRecord rec;
  rec.epoch = epoch;
  rec.temperature = temperature;
  rec.mean.supervised_m = supervised;

  // Crops are drawn once and shared by both halves of the step.
  std::vector<Pass> passes(batch.items.size());
  for (std::size_t i = 0; i < batch.items.size(); ++i) {
    const Utterance& u = *batch.items[i];
    const std::size_t T = u.noisy_mag.dim(0);
    std::size_t len = T, off = 0;
    if (cfg.crop_frames > 0 && static_cast<std::size_t>(cfg.crop_frames) < T) {
      len = static_cast<std::size_t>(cfg.crop_frames);
      off = static_cast<std::size_t>(uniform_index(rng, T - len + 1));
    }
    passes[i].noisy = crop_frames(u.noisy_mag, off, len);
    passes[i].clean = crop_frames(u.clean_mag, off, len);
    passes[i].rec.crop_offset = off;
  }

  // Discriminator side: D1-D3 and F minimise Loss_D; enhanced is detached.
  mb.splitter.params().zero_grad();
  mb.d_bak.params().zero_grad();
  mb.d_sig.params().zero_grad();
  mb.d_ovl.params().zero_grad();
  for (std::size_t i = 0; i < passes.size(); ++i) {
    Pass& p = passes[i];
    forward_pass(mb, p, *batch.items[i], cfg, supervised, temperature, snr_max_db, false);
    check_finite(p);
    const LossBreakdown& l = p.rec.parts;
    rec.loss_d_step += scale * l.loss_d;
    const MosScores& pr = p.rec.predictions;
    const MosScores& tg = p.rec.targets;
    mb.d_ovl.backward(p.ovl_trace, scale * 2.0 * (pr.ovl - tg.ovl), false);
    if (fb) continue;
    const BandWeights& w = p.rec.weights;
    const Tensor g_high =
        mb.d_bak.backward(p.bak_trace, scale * w.bak * 2.0 * (pr.bak - tg.bak), true);
    const Tensor g_low =
        mb.d_sig.backward(p.sig_trace, scale * w.sig * 2.0 * (pr.sig - tg.sig), true);
    double g_frac = split_fraction_grad(SplitKind::kSoft, &p.split, p.enhanced, g_low, g_high);
    if (supervised)
      g_frac += scale * loss_m_grad(p.f_trace.fraction, batch.items[i]->oracle.point.fraction());
    mb.splitter.backward(p.f_trace, g_frac, false);
  }
  adam_step(mb.d_ovl.params(), mb.opt_ovl, adam);
  if (!fb) {
    adam_step(mb.d_bak.params(), mb.opt_bak, adam);
    adam_step(mb.d_sig.params(), mb.opt_sig, adam);
    adam_step(mb.splitter.params(), mb.opt_splitter, adam);
  }

  // Generator side: G minimises Loss_G + gamma * Loss_D with the updated
  // discriminators; targets stay stop-gradient.
  mb.generator.params().zero_grad();
  const double lam = cfg.lambda_adv;
  const double gamma = cfg.gamma;
  for (std::size_t i = 0; i < passes.size(); ++i) {
    Pass& p = passes[i];
    forward_pass(mb, p, *batch.items[i], cfg, supervised, temperature, snr_max_db, true);
    LossBreakdown& l = p.rec.parts;
    DiscriminatorPredictions dp;
    dp.bak = p.rec.predictions.bak;
    dp.sig = p.rec.predictions.sig;
    dp.ovl = p.rec.predictions.ovl;
    dp.use_bak = dp.use_sig = !fb;
    l.loss_g = loss_generator(p.enhanced, p.clean, dp, lam);
    l.loss_total = loss_total(l.loss_g, l.loss_d, gamma);
    check_finite(p);

    const MosScores& pr = p.rec.predictions;
    const MosScores& tg = p.rec.targets;
    Tensor g_enh = loss_generator_l1_grad(p.enhanced, p.clean);
    for (double& v : g_enh.values()) v *= scale;
    const double g_ovl =
        scale * (lam * 2.0 * (pr.ovl - kBestScore) + gamma * 2.0 * (pr.ovl - tg.ovl));
    g_enh = add(std::move(g_enh), mb.d_ovl.backward(p.ovl_trace, g_ovl, true));
    if (!fb) {
      const BandWeights& w = p.rec.weights;
      const double g_bak = scale * (lam * 2.0 * (pr.bak - kBestScore) +
                                    gamma * w.bak * 2.0 * (pr.bak - tg.bak));
      const double g_sig = scale * (lam * 2.0 * (pr.sig - kBestScore) +
                                    gamma * w.sig * 2.0 * (pr.sig - tg.sig));
      const Tensor g_high = mb.d_bak.backward(p.bak_trace, g_bak, true);
      const Tensor g_low = mb.d_sig.backward(p.sig_trace, g_sig, true);
      g_enh = add(std::move(g_enh), soft_split_input_grad(p.split, g_low, g_high));
      double g_frac =
          split_fraction_grad(SplitKind::kSoft, &p.split, p.enhanced, g_low, g_high);
      if (supervised)
        g_frac += scale * gamma *
                  loss_m_grad(p.f_trace.fraction, batch.items[i]->oracle.point.fraction());
      const auto fg = mb.splitter.backward(p.f_trace, g_frac, true);
      g_enh = add(std::move(g_enh), fg.enhanced);
    }
    mb.generator.backward(p.g_trace, g_enh);
    accumulate(rec.mean, l, scale);
    rec.utterances.push_back(std::move(p.rec));
  }
  if (!supervised) rec.mean.loss_m = 0.0;
  adam_step(mb.generator.params(), mb.opt_generator, adam);
  return rec;
}

DivisionStats division_stats(const ModelBundle& mb, const std::vector<Utterance>& utts,
                             const TrainConfig& cfg, double temperature) {
  DivisionStats s;
  if (utts.empty() || full_band(cfg)) return s;
  double sum = 0.0, sum2 = 0.0, err = 0.0, dev = 0.0;
  for (const auto& u : utts) {
    const Tensor enh = mb.generator.forward(u.noisy_mag);
    const double frac = mb.splitter.forward(u.noisy_mag, enh);
    const std::size_t bins = u.noisy_mag.dim(1);
    const DivisionPoint m = DivisionPoint::from_fraction(frac, bins);
    const double hz = m.hz(kCanonicalSampleRate);
    sum += hz;
    sum2 += hz * hz;
    err += std::abs(static_cast<double>(m.bin()) - static_cast<double>(u.oracle.point.bin())) /
           static_cast<double>(bins);
    const auto w = soft_split_weights(bins, guarded(frac), temperature);
    for (std::size_t b = 0; b < bins; ++b)
      dev = std::max(dev, std::abs(w[b] - (b >= m.bin() ? 1.0 : 0.0)));
  }
  const double n = static_cast<double>(utts.size());
  s.count = utts.size();
  s.mean_hz = sum / n;
  s.std_hz = std::sqrt(std::max(0.0, sum2 / n - s.mean_hz * s.mean_hz));
  s.mean_abs_err_fraction = err / n;
  s.soft_hard_max_dev = dev;
  return s;
}

// ---------------------------------------------------------------- pretraining

namespace {

struct PretrainSample {
  Tensor clean, degraded;
  DivisionPoint point{1, 2};
};

double pretrain_level_snr(int level, int levels) {
  if (levels <= 2) return 10.0;
  return 25.0 - 30.0 * static_cast<double>(level - 1) / static_cast<double>(levels - 2);
}

std::vector<PretrainSample> make_variants(const ManifestEntry& e, const TrainConfig& cfg,
                                          std::mt19937_64& rng) {
  const StftConfig sc = stft_config(cfg);
  const Waveform clean = read_wav(e.clean_path);
  const Waveform noisy = read_wav(e.noisy_path);
  if (clean.size() != noisy.size())
    throw InvalidInput("pretraining: length mismatch for " + e.utterance_id);
  Waveform noise = noisy;
  for (std::size_t i = 0; i < noise.size(); ++i) noise.samples[i] -= clean.samples[i];
  const Tensor clean_mag = magnitude(stft(clean, sc));
  const DivisionPoint point = dfkd_division_point(clean_mag, oracle_settings(cfg)).point;
  const bool silent_noise = energy(noise.samples) == 0.0 || energy(clean.samples) == 0.0;

  std::vector<PretrainSample> out;
  out.push_back({clean_mag, clean_mag, point});
  for (int level = 1; level < cfg.pretrain_levels; ++level) {
    Tensor deg = clean_mag;
    if (!silent_noise) {
      const Waveform mixed =
          mix_at_snr(clean, noise, pretrain_level_snr(level, cfg.pretrain_levels));
      deg = magnitude(stft(mixed, sc));
    }
    if (level % 2 == 0) {
      const std::size_t T = deg.dim(0), F = deg.dim(1);
      std::vector<double> gain(F);
      for (double& g : gain) g = uniform(rng, 0.5, 1.0);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t f = 0; f < F; ++f) deg.at(t, f) *= gain[f];
    }
    out.push_back({clean_mag, std::move(deg), point});
  }
  return out;
}

struct Mse {
  double bak = 0.0, sig = 0.0, ovl = 0.0;
};

}  // namespace

PretrainReport pretrain_discriminators(ModelBundle& mb,
                                       const std::vector<ManifestEntry>& entries,
                                       const TrainConfig& cfg) {
  if (entries.empty()) throw InvalidInput("pretraining needs at least one utterance");
  std::size_t n = entries.size();
  if (cfg.pretrain_utterances > 0)
    n = std::min(n, static_cast<std::size_t>(cfg.pretrain_utterances));
  const std::size_t n_val = n >= 2 ? std::max<std::size_t>(1, n / 5) : 0;
  const std::size_t n_train = n - n_val;

  std::mt19937_64 rng(derive_seed(cfg.seed, 101));
  std::vector<PretrainSample> train, val;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = make_variants(entries[i], cfg, rng);
    auto& dst = i < n_train ? train : val;
    for (auto& s : v) dst.push_back(std::move(s));
  }

  PretrainReport rep;
  rep.train_utterances = n_train;
  rep.val_utterances = n_val;
  rep.samples = train.size();

  AdamOptions adam;
  adam.learning_rate = cfg.learning_rate;
  AdamState s_bak, s_sig, s_ovl;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  const double log_lo = std::log(cfg.temperature_end), log_hi = std::log(cfg.temperature_start);

  for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    std::mt19937_64 erng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    Mse acc;
    for (const auto& idx : batch_indices(train.size(), bs, erng())) {
      mb.d_bak.params().zero_grad();
      mb.d_sig.params().zero_grad();
      mb.d_ovl.params().zero_grad();
      const double scale = 1.0 / static_cast<double>(idx.size());
      for (auto k : idx) {
        const PretrainSample& s = train[k];
        const std::size_t T = s.clean.dim(0);
        std::size_t len = T, off = 0;
        if (cfg.crop_frames > 0 && static_cast<std::size_t>(cfg.crop_frames) < T) {
          len = static_cast<std::size_t>(cfg.crop_frames);
          off = static_cast<std::size_t>(uniform_index(erng, T - len + 1));
        }
        const Tensor c = crop_frames(s.clean, off, len);
        const Tensor d = crop_frames(s.degraded, off, len);
        const double temp = std::exp(uniform(erng, log_lo, log_hi));
        const MosScores tg = score_utterance(c, d, s.point);
        const SoftSplit sp = soft_split(d, s.point.fraction(), temp);
        nets::MetricDiscriminator::Trace tb, ts, to;
        const double pb = mb.d_bak.forward(sp.high, &tb);
        const double ps = mb.d_sig.forward(sp.low, &ts);
        const double po = mb.d_ovl.forward(d, &to);
        acc.bak += (pb - tg.bak) * (pb - tg.bak);
        acc.sig += (ps - tg.sig) * (ps - tg.sig);
        acc.ovl += (po - tg.ovl) * (po - tg.ovl);
        mb.d_bak.backward(tb, scale * 2.0 * (pb - tg.bak), false);
        mb.d_sig.backward(ts, scale * 2.0 * (ps - tg.sig), false);
        mb.d_ovl.backward(to, scale * 2.0 * (po - tg.ovl), false);
      }
      adam_step(mb.d_bak.params(), s_bak, adam);
      adam_step(mb.d_sig.params(), s_sig, adam);
      adam_step(mb.d_ovl.params(), s_ovl, adam);
    }
    const double nt = static_cast<double>(train.size());
    rep.train_mse_bak = acc.bak / nt;
    rep.train_mse_sig = acc.sig / nt;
    rep.train_mse_ovl = acc.ovl / nt;
  }

  Mse v;
  for (const auto& s : val) {
    const MosScores tg = score_utterance(s.clean, s.degraded, s.point);
    const SoftSplit sp = soft_split(s.degraded, s.point.fraction(), cfg.temperature_end);
    const double pb = mb.d_bak.forward(sp.high);
    const double ps = mb.d_sig.forward(sp.low);
    const double po = mb.d_ovl.forward(s.degraded);
    v.bak += (pb - tg.bak) * (pb - tg.bak);
    v.sig += (ps - tg.sig) * (ps - tg.sig);
    v.ovl += (po - tg.ovl) * (po - tg.ovl);
  }
  if (!val.empty()) {
    const double nv = static_cast<double>(val.size());
    rep.val_mse_bak = v.bak / nv;
    rep.val_mse_sig = v.sig / nv;
    rep.val_mse_ovl = v.ovl / nv;
  }
  return rep;
}

// ---------------------------------------------------------------- logging

namespace {

json breakdown_json(const LossBreakdown& l) {
  json j;
  j["loss_m"] = l.supervised_m ? json(l.loss_m) : json(nullptr);
  j["loss_bak"] = l.loss_bak;
  j["loss_sig"] = l.loss_sig;
  j["loss_ovl"] = l.loss_ovl;
  j["loss_d"] = l.loss_d;
  j["loss_g"] = l.loss_g;
  j["loss_total"] = l.loss_total;
  j["alpha"] = l.alpha;
  j["supervised_m"] = l.supervised_m;
  return j;
}

json division_json(const DivisionStats& s) {
  return json{{"count", s.count},
              {"m_hat_mean_hz", s.mean_hz},
              {"m_hat_std_hz", s.std_hz},
              {"mean_abs_err_fraction", s.mean_abs_err_fraction},
              {"soft_hard_max_dev", s.soft_hard_max_dev}};
}

}  // namespace

std::string step_record_json(const StepRecord& r) {
  json j;
  j["type"] = "step";
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["temperature"] = r.temperature;
  j["loss_d_step"] = r.loss_d_step;
  j["mean"] = breakdown_json(r.mean);
  json ids = json::array(), utts = json::array();
  for (const auto& u : r.utterances) {
    ids.push_back(u.id);
    json x = breakdown_json(u.parts);
    x["utterance_id"] = u.id;
    x["snr_db"] = u.snr_db;
    x["crop_offset"] = u.crop_offset;
    x["bak_weight"] = u.weights.bak;
    x["sig_weight"] = u.weights.sig;
    x["target"] = {{"bak", u.targets.bak}, {"sig", u.targets.sig}, {"ovl", u.targets.ovl}};
    x["pred"] = {{"bak", u.predictions.bak}, {"sig", u.predictions.sig},
                 {"ovl", u.predictions.ovl}};
    if (u.has_split) {
      x["m_hat_fraction"] = u.m_hat_fraction;
      x["m_hat_bin"] = u.m_hat_bin;
      x["m_hat_hz"] = u.m_hat_hz;
    } else {
      x["m_hat_fraction"] = x["m_hat_bin"] = x["m_hat_hz"] = nullptr;
    }
    x["label_bin"] = u.label_bin;
    x["label_hz"] = u.label_hz;
    utts.push_back(std::move(x));
  }
  j["utterance_ids"] = std::move(ids);
  j["utterances"] = std::move(utts);
  return j.dump();
}

std::string epoch_record_json(const EpochRecord& r) {
  json j;
  j["type"] = "epoch";
  j["epoch"] = r.epoch;
  j["temperature"] = r.temperature;
  j["supervised_m"] = r.supervised;
  j["steps"] = r.steps;
  j["loss_total_mean"] = r.loss_total_mean;
  j["train"] = division_json(r.train);
  j["val"] = division_json(r.val);
  j["checksum"] = r.checksum;
  return j.dump();
}

// ---------------------------------------------------------------- driver

namespace {

std::string pretrain_meta(const PretrainReport& r) {
  json j;
  j["train_utterances"] = r.train_utterances;
  j["val_utterances"] = r.val_utterances;
  j["samples"] = r.samples;
  j["train_mse"] = {{"bak", r.train_mse_bak}, {"sig", r.train_mse_sig}, {"ovl", r.train_mse_ovl}};
  j["val_mse"] = {{"bak", r.val_mse_bak}, {"sig", r.val_mse_sig}, {"ovl", r.val_mse_ovl}};
  return j.dump();
}

// Keeps the log records of epochs <= last_epoch so a resumed run appends
// to exactly the prefix an uninterrupted run would have written.
void truncate_log(const fs::path& path, int last_epoch) {
  std::vector<std::string> keep;
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("epoch")) {
        keep.push_back(line);
        continue;
      }
      if (j["epoch"].get<int>() <= last_epoch) keep.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << "\n";
}

std::string epoch_file(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03d.ckpt", epoch);
  return buf;
}

}  // namespace

RunResult run_training(const Manifest& manifest, const TrainConfig& cfg,
                       const RunOptions& opts) {
  cfg.validate();
  const auto train_entries = manifest.of(Split::kTrain);
  if (train_entries.empty()) throw InvalidInput("training split of the manifest is empty");
  const double snr_max = resolve_snr_max(cfg, manifest.snr_max_db);
  const StftConfig sc = stft_config(cfg);
  validate(sc);
  auto say = [&](const std::string& s) {
    if (opts.progress) opts.progress(s);
  };

  fs::create_directories(opts.out_dir / "checkpoints");
  RunResult res;
  res.log_path = opts.out_dir / "train_log.ndjson";

  Checkpoint ck{ModelBundle::create(cfg.seed, sc.bins()), 0, cfg.hash(), {}, {}};
  int start_epoch = 1;
  if (opts.resume) {
    ck = load_checkpoint(*opts.resume);
    if (ck.config_hash != cfg.hash())
      throw ConfigError("resume: checkpoint was written with a different config (hash " +
                        to_hex(ck.config_hash) + ", current " + to_hex(cfg.hash()) + ")");
    start_epoch = ck.epoch + 1;
    truncate_log(res.log_path, ck.epoch);
    say("resuming after epoch " + std::to_string(ck.epoch));
  } else {
    if (opts.init) {
      Checkpoint init = load_checkpoint(*opts.init);
      ck.models.generator = std::move(init.models.generator);
      ck.models.splitter = std::move(init.models.splitter);
      ck.models.d_bak = std::move(init.models.d_bak);
      ck.models.d_sig = std::move(init.models.d_sig);
      ck.models.d_ovl = std::move(init.models.d_ovl);
      ck.meta["init_checkpoint"] = checkpoint_id(init);
      if (init.meta.count("pretrain")) ck.meta["pretrain"] = init.meta["pretrain"];
    } else if (cfg.pretrain) {
      say("pretraining discriminators");
      res.pretrain = pretrain_discriminators(ck.models, train_entries, cfg);
      ck.meta["pretrain"] = pretrain_meta(*res.pretrain);
      save_checkpoint(opts.out_dir / "checkpoints" / "pretrained.ckpt", ck);
    }
    std::ofstream(res.log_path, std::ios::trunc);
  }
  ck.config_hash = cfg.hash();
  ck.meta["config"] = cfg.to_text();
  ck.meta["variant"] = cfg.variant();
  ck.meta["snr_max_db"] = json(snr_max).dump();

  say("loading " + std::to_string(train_entries.size()) + " training utterances");
  const std::vector<Utterance> train = load_utterances(train_entries, sc, oracle_settings(cfg));
  const std::vector<Utterance> val =
      load_utterances(manifest.of(Split::kVal), sc, oracle_settings(cfg));

  std::ofstream log(res.log_path, std::ios::app);
  if (!log) throw IoError("cannot write training log: " + res.log_path.string());
  std::int64_t step = 0;
  const auto steps_per_epoch = static_cast<std::int64_t>(
      (train.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size));
  step = steps_per_epoch * (start_epoch - 1);

  const int last = opts.stop_after_epoch > 0 ? std::min(cfg.epochs, opts.stop_after_epoch)
                                             : cfg.epochs;
  for (int epoch = start_epoch; epoch <= last; ++epoch) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 10000 + static_cast<std::uint64_t>(epoch)));
    EpochRecord er;
    er.epoch = epoch;
    er.temperature = temperature_at(cfg, epoch);
    er.supervised = supervision_active(epoch, cfg.k_supervised);
    double sum = 0.0, sum2 = 0.0, err = 0.0, total = 0.0;
    std::size_t seen = 0;
    const auto batches = batch_iterator(train, static_cast<std::size_t>(cfg.batch_size), rng());
    for (const auto& batch : batches) {
      StepRecord sr;
      try {
        sr = train_step(ck.models, batch, cfg, epoch, snr_max, rng);
      } catch (const NonFiniteLoss& ex) {
        log << json{{"type", "abort"}, {"epoch", epoch}, {"step", step + 1},
                    {"utterance_id", ex.utterance_id()}, {"reason", ex.what()}}
                   .dump()
            << "\n";
        throw;
      }
      sr.step = ++step;
      log << step_record_json(sr) << "\n";
      for (const auto& u : sr.utterances) {
        total += u.parts.loss_total;
        if (!u.has_split) continue;
        sum += u.m_hat_hz;
        sum2 += u.m_hat_hz * u.m_hat_hz;
        err += std::abs(static_cast<double>(u.m_hat_bin) - static_cast<double>(u.label_bin)) /
               static_cast<double>(sc.bins());
        ++seen;
      }
      ++er.steps;
    }
    er.loss_total_mean = total / static_cast<double>(train.size());
    if (seen > 0) {
      const double n = static_cast<double>(seen);
      er.train.count = seen;
      er.train.mean_hz = sum / n;
      const double mean = sum / n;
      er.train.std_hz = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
      er.train.mean_abs_err_fraction = err / n;
    }
    er.val = division_stats(ck.models, val, cfg, er.temperature);
    er.checksum = to_hex(ck.models.checksum());
    log << epoch_record_json(er) << "\n";
    log.flush();

    ck.epoch = epoch;
    ck.rng_state = rng_state(rng);
    save_checkpoint(opts.out_dir / "checkpoints" / epoch_file(epoch), ck);
    res.epochs.push_back(er);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "epoch %d: loss_total %.4f  m_hat %.0f Hz (val err %.3f)  T %.4g", epoch,
                  er.loss_total_mean, er.val.mean_hz, er.val.mean_abs_err_fraction,
                  er.temperature);
    say(buf);
  }
  res.checkpoint_path = opts.out_dir / "final.ckpt";
  save_checkpoint(res.checkpoint_path, ck);
  res.final = std::move(ck);
  return res;
}

}  // namespace sad
