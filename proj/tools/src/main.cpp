// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// sad: corpus synthesis, discriminator pretraining, training, enhancement,
// evaluation, division-point inspection and spectrogram plots.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plot.hpp"
#include "sad/checkpoint.hpp"
#include "sad/config.hpp"
#include "sad/data.hpp"
#include "sad/error.hpp"
#include "sad/eval.hpp"
#include "sad/training.hpp"
#include "sad/wav.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

sad::TrainConfig resolve_config(const Globals& g) {
  sad::TrainConfig cfg;
  if (!g.config_path.empty()) cfg = sad::load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw sad::ConfigError("--set expects key=value, got " + kv);
    sad::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::string need_out(const Globals& g, const char* what) {
  if (g.out.empty()) throw sad::ConfigError(std::string("--out is required (") + what + ")");
  return g.out;
}

void print_aggregate(const sad::MetricsReport& r) {
  const auto rows = {std::make_pair("enhanced", &r.rows),
                     std::make_pair("identity", &r.identity_rows)};
  for (const auto& [label, data] : rows) {
    const auto si = sad::aggregate(*data, "si_sdr_improvement");
    const auto seg = sad::aggregate(*data, "seg_snr_improvement");
    const auto bak = sad::aggregate(*data, "bak");
    std::printf("%-9s n=%zu  SI-SDR impr. median %.3f dB (mean %.3f)  segSNR impr. mean %.3f dB"
                "  BAK proxy mean %.3f\n",
                label, si.count, si.median, si.mean, seg.mean, bak.mean);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-aware discriminator speech enhancement toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key=value training config file");
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic noisy/clean corpus");
  synth->fallthrough();
  sad::CorpusOptions corpus;
  synth->add_option("--n", corpus.n_utterances, "number of utterances")->capture_default_str();
  synth->add_option("--snr-lo", corpus.snr_lo_db, "lowest SNR in dB")->capture_default_str();
  synth->add_option("--snr-hi", corpus.snr_hi_db, "highest SNR in dB")->capture_default_str();
  synth->add_option("--duration", corpus.duration_s, "seconds per utterance")
      ->capture_default_str();

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "pretrain the metric discriminators");
  pretrain->fallthrough();
  std::string manifest_path;
  pretrain->add_option("--manifest", manifest_path, "corpus manifest")->required();

  // train
  auto* train = app.add_subcommand("train", "adversarial training run");
  train->fallthrough();
  std::string init_path, resume_path;
  int stop_after = 0;
  train->add_option("--manifest", manifest_path, "corpus manifest")->required();
  train->add_option("--init", init_path, "initial weights (e.g. a pretrained checkpoint)");
  train->add_option("--resume", resume_path, "continue from an epoch checkpoint");
  train->add_option("--stop-after", stop_after, "stop after this epoch");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "enhance one WAV file");
  enhance->fallthrough();
  std::string ckpt_path, in_path;
  enhance->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  enhance->add_option("--in", in_path, "noisy input WAV")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "metrics report over a manifest split");
  eval->fallthrough();
  std::string split_name = "val";
  eval->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  eval->add_option("--manifest", manifest_path, "corpus manifest")->required();
  eval->add_option("--split", split_name, "train, val or test")->capture_default_str();

  // split
  auto* split = app.add_subcommand("split", "tabulate oracle and predicted division points");
  split->fallthrough();
  split->add_option("--manifest", manifest_path, "corpus manifest")->required();
  split->add_option("--checkpoint", ckpt_path, "checkpoint whose splitter to query");

  // plot
  auto* plot = app.add_subcommand("plot", "three-panel spectrogram comparison (PNG)");
  plot->fallthrough();
  std::string noisy_wav, enh_wav, sad_wav;
  std::optional<double> division_hz;
  plot->add_option("--noisy", noisy_wav, "noisy WAV")->required();
  plot->add_option("--enhanced", enh_wav, "baseline enhanced WAV")->required();
  plot->add_option("--enhanced-sad", sad_wav, "enhanced WAV from the SaD run")->required();
  plot->add_option("--division-hz", division_hz, "draw the division point at this frequency");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "manifest for paired clean/noisy WAV folders");
  ingest->fallthrough();
  std::string clean_dir, noisy_dir;
  bool resample = false;
  ingest->add_option("--clean-dir", clean_dir, "directory of clean WAVs")->required();
  ingest->add_option("--noisy-dir", noisy_dir, "directory of same-named noisy WAVs")
      ->required();
  ingest->add_flag("--resample", resample, "resample other rates instead of rejecting them");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto progress = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
    if (*synth) {
      if (g.seed) corpus.seed = *g.seed;
      const fs::path out = need_out(g, "corpus directory");
      const sad::Manifest m = sad::build_corpus(corpus, out);
      std::printf("wrote %zu utterances to %s (snr_max %.3f dB)\n", m.entries.size(),
                  m.path.string().c_str(), m.snr_max_db);
    } else if (*pretrain) {
      const sad::TrainConfig cfg = resolve_config(g);
      const fs::path out = need_out(g, "checkpoint path");
      const sad::Manifest m = sad::load_manifest(manifest_path);
      sad::Checkpoint ck{sad::ModelBundle::create(cfg.seed, sad::stft_config(cfg).bins()), 0,
                         cfg.hash(), {}, {}};
      const auto rep = sad::pretrain_discriminators(ck.models, m.of(sad::Split::kTrain), cfg);
      nlohmann::json j;
      j["val_mse"] = {{"bak", rep.val_mse_bak}, {"sig", rep.val_mse_sig},
                      {"ovl", rep.val_mse_ovl}};
      j["train_mse"] = {{"bak", rep.train_mse_bak}, {"sig", rep.train_mse_sig},
                        {"ovl", rep.train_mse_ovl}};
      ck.meta["pretrain"] = j.dump();
      ck.meta["config"] = cfg.to_text();
      sad::save_checkpoint(out, ck);
      std::printf("validation MSE  D1/BAK %.4f  D2/SIG %.4f  D3/OVL %.4f\n", rep.val_mse_bak,
                  rep.val_mse_sig, rep.val_mse_ovl);
    } else if (*train) {
      const sad::TrainConfig cfg = resolve_config(g);
      sad::RunOptions opts;
      opts.out_dir = need_out(g, "run directory");
      if (!init_path.empty()) opts.init = init_path;
      if (!resume_path.empty()) opts.resume = resume_path;
      opts.stop_after_epoch = stop_after;
      opts.progress = progress;
      const auto res = sad::run_training(sad::load_manifest(manifest_path), cfg, opts);
      std::printf("variant %s  final checkpoint %s  log %s\n", cfg.variant().c_str(),
                  res.checkpoint_path.string().c_str(), res.log_path.string().c_str());
    } else if (*enhance) {
      sad::enhance_file(sad::load_checkpoint(ckpt_path), in_path, need_out(g, "output WAV"));
    } else if (*eval) {
      const sad::MetricsReport r = sad::evaluate(
          sad::load_checkpoint(ckpt_path), sad::load_manifest(manifest_path),
          sad::parse_split(split_name));
      sad::write_report(need_out(g, "report path"), r);
      std::printf("variant %s  ablations [", r.variant.c_str());
      for (std::size_t i = 0; i < r.ablations.size(); ++i)
        std::printf("%s%s", i ? ", " : "", r.ablations[i].c_str());
      std::printf("]  checkpoint %s\n", r.checkpoint_id.c_str());
      print_aggregate(r);
    } else if (*split) {
      std::optional<sad::Checkpoint> ck;
      sad::TrainConfig cfg = resolve_config(g);
      if (!ckpt_path.empty()) {
        ck = sad::load_checkpoint(ckpt_path);
        cfg = sad::checkpoint_config(*ck);
      }
      const auto rows =
          sad::split_inspect(sad::load_manifest(manifest_path), ck ? &*ck : nullptr, cfg);
      if (g.out.empty()) {
        sad::write_split_table(std::cout, rows);
      } else {
        std::ofstream out(g.out);
        if (!out) throw sad::IoError("cannot write " + g.out);
        sad::write_split_table(out, rows);
      }
    } else if (*plot) {
      sad::plot::plot_triptych(sad::read_wav(noisy_wav), sad::read_wav(enh_wav),
                               sad::read_wav(sad_wav), division_hz, need_out(g, "PNG path"));
    } else if (*ingest) {
      sad::WavReadOptions ro;
      ro.strict = !resample;
      const auto res = sad::ingest_pairs(clean_dir, noisy_dir, need_out(g, "manifest path"), ro);
      for (const auto& issue : res.rejected)
        std::fprintf(stderr, "rejected %s: %s\n", issue.utterance_id.c_str(),
                     issue.reason.c_str());
      std::printf("ingested %zu pairs, rejected %zu\n", res.manifest.entries.size(),
                  res.rejected.size());
    }
  } catch (const sad::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
