// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sad/error.hpp"
#include "sad/mos.hpp"
#include "sad/training.hpp"
#include "sad/wav.hpp"

namespace sad {

namespace fs = std::filesystem;
using nlohmann::json;

TrainConfig checkpoint_config(const Checkpoint& ckpt) {
  const auto it = ckpt.meta.find("config");
  if (it == ckpt.meta.end()) return {};
  return parse_config(it->second);
}

Waveform enhance_waveform(const nets::Generator& g, const Waveform& noisy,
                          const StftConfig& cfg) {
  Waveform out;
  out.sample_rate = noisy.sample_rate;
  out.samples.assign(noisy.size(), 0.0);
  if (noisy.size() < cfg.fft_size) return out;
  const Spectrogram spec = stft(noisy, cfg);
  const Tensor enhanced = g.forward(magnitude(spec));
  const Waveform y = istft(with_magnitude(spec, enhanced));
  std::copy_n(y.samples.begin(), std::min(y.size(), out.size()), out.samples.begin());
  return out;
}

void enhance_file(const Checkpoint& ckpt, const fs::path& in_wav, const fs::path& out_wav) {
  const TrainConfig cfg = checkpoint_config(ckpt);
  const Waveform noisy = read_wav(in_wav);
  write_wav(out_wav, enhance_waveform(ckpt.models.generator, noisy, stft_config(cfg)));
}

namespace {

UtteranceMetrics score_pair(const ManifestEntry& e, const Waveform& clean,
                            const Waveform& noisy, const Waveform& enhanced,
                            const TrainConfig& cfg,
                            const OracleResult& oracle) {
  UtteranceMetrics m;
  m.utterance_id = e.utterance_id;
  m.snr_db = e.snr_db;
  m.si_sdr_noisy = si_sdr(clean, noisy);
  m.si_sdr_enhanced = si_sdr(clean, enhanced);
  m.si_sdr_improvement = m.si_sdr_enhanced - m.si_sdr_noisy;
  m.seg_snr_noisy = segmental_snr(clean.samples, noisy.samples);
  m.seg_snr_enhanced = segmental_snr(clean.samples, enhanced.samples);
  m.seg_snr_improvement = m.seg_snr_enhanced - m.seg_snr_noisy;
  const StftConfig sc = stft_config(cfg);
  const MosScores s =
      score_utterance(magnitude(stft(clean, sc)), magnitude(stft(enhanced, sc)), oracle.point);
  m.bak = s.bak;
  m.sig = s.sig;
  m.ovl = s.ovl;
  m.oracle_hz = oracle.point.hz(clean.sample_rate);
  m.oracle_fallback = oracle.fallback;
  return m;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json row_json(const UtteranceMetrics& m) {
  json j;
  j["utterance_id"] = m.utterance_id;
  if (!m.error.empty()) {
    j["error"] = m.error;
    return j;
  }
  j["snr_db"] = m.snr_db;
  j["si_sdr_noisy"] = m.si_sdr_noisy;
  j["si_sdr_enhanced"] = m.si_sdr_enhanced;
  j["si_sdr_improvement"] = m.si_sdr_improvement;
  j["seg_snr_noisy"] = m.seg_snr_noisy;
  j["seg_snr_enhanced"] = m.seg_snr_enhanced;
  j["seg_snr_improvement"] = m.seg_snr_improvement;
  j["bak_proxy"] = m.bak;
  j["sig_proxy"] = m.sig;
  j["ovl_proxy"] = m.ovl;
  j["m_hat_hz"] = opt_json(m.m_hat_hz);
  j["oracle_hz"] = m.oracle_hz;
  j["oracle_fallback"] = m.oracle_fallback;
  for (const char* k : {"pesq", "stoi", "csig", "cbak", "covl"}) j[k] = nullptr;
  return j;
}

json aggregate_json(const std::vector<UtteranceMetrics>& rows) {
  json j = json::object();
  for (const auto& name : aggregate_metrics()) {
    const Aggregate a = aggregate(rows, name);
    j[name] = a.count == 0 ? json(nullptr)
                           : json{{"count", a.count}, {"median", a.median}, {"mean", a.mean}};
  }
  return j;
}

}  // namespace

const std::vector<std::string>& aggregate_metrics() {
  static const std::vector<std::string> names = {
      "si_sdr_improvement", "seg_snr_improvement", "si_sdr_enhanced", "bak", "sig", "ovl",
      "m_hat_hz"};
  return names;
}

Aggregate aggregate(const std::vector<UtteranceMetrics>& rows, const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    if (metric == "si_sdr_improvement")
      v.push_back(r.si_sdr_improvement);
    else if (metric == "seg_snr_improvement")
      v.push_back(r.seg_snr_improvement);
    else if (metric == "si_sdr_enhanced")
      v.push_back(r.si_sdr_enhanced);
    else if (metric == "bak")
      v.push_back(r.bak);
    else if (metric == "sig")
      v.push_back(r.sig);
    else if (metric == "ovl")
      v.push_back(r.ovl);
    else if (metric == "m_hat_hz") {
      if (r.m_hat_hz) v.push_back(*r.m_hat_hz);
    } else {
      throw InvalidInput("unknown metric '" + metric + "'");
    }
  }
  Aggregate a;
  a.count = v.size();
  if (v.empty()) return a;
  double sum = 0.0;
  for (double x : v) sum += x;
  a.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  a.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return a;
}

MetricsReport evaluate(const Checkpoint& ckpt, const Manifest& manifest, Split split) {
  const TrainConfig cfg = checkpoint_config(ckpt);
  const StftConfig sc = stft_config(cfg);
  const bool has_splitter = cfg.discriminator_mode == DiscriminatorMode::kScenarioAware;
  MetricsReport rep;
  rep.config_hash = to_hex(cfg.hash());
  rep.checkpoint_id = checkpoint_id(ckpt);
  rep.variant = cfg.variant();
  rep.ablations = cfg.ablations();
  rep.split = to_string(split);
  for (const auto& e : manifest.of(split)) {
    try {
      const Waveform clean = read_wav(e.clean_path);
      const Waveform noisy = read_wav(e.noisy_path);
      if (clean.size() != noisy.size()) throw InvalidInput("clean and noisy lengths differ");
      const Tensor clean_mag = magnitude(stft(clean, sc));
      const OracleResult oracle = dfkd_division_point(clean_mag, oracle_settings(cfg));
      const Waveform enhanced = enhance_waveform(ckpt.models.generator, noisy, sc);
      UtteranceMetrics m = score_pair(e, clean, noisy, enhanced, cfg, oracle);
      if (has_splitter) {
        const Tensor noisy_mag = magnitude(stft(noisy, sc));
        const double f =
            ckpt.models.splitter.forward(noisy_mag, ckpt.models.generator.forward(noisy_mag));
        m.m_hat_hz = DivisionPoint::from_fraction(f, sc.bins()).hz(noisy.sample_rate);
      }
      rep.rows.push_back(std::move(m));
      rep.identity_rows.push_back(score_pair(e, clean, noisy, noisy, cfg, oracle));
    } catch (const Error& ex) {
      UtteranceMetrics bad;
      bad.utterance_id = e.utterance_id;
      bad.error = ex.what();
      rep.rows.push_back(bad);
      rep.identity_rows.push_back(bad);
    }
  }
  return rep;
}

std::string report_json(const MetricsReport& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["checkpoint_id"] = r.checkpoint_id;
  j["variant"] = r.variant;
  j["ablations"] = r.ablations;
  j["split"] = r.split;
  j["metric_note"] =
      "bak/sig/ovl are reference-based proxies; pesq/stoi/csig/cbak/covl are left null for "
      "external scorers";
  json rows = json::array(), id_rows = json::array();
  for (const auto& m : r.rows) rows.push_back(row_json(m));
  for (const auto& m : r.identity_rows) id_rows.push_back(row_json(m));
  j["rows"] = std::move(rows);
  j["identity_rows"] = std::move(id_rows);
  j["aggregate"] = aggregate_json(r.rows);
  j["identity_aggregate"] = aggregate_json(r.identity_rows);
  std::size_t failures = 0;
  for (const auto& m : r.rows) failures += m.error.empty() ? 0 : 1;
  j["failures"] = failures;
  return j.dump(2);
}

void write_report(const fs::path& path, const MetricsReport& r) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << report_json(r) << "\n";
}

std::vector<SplitRow> split_inspect(const Manifest& manifest, const Checkpoint* ckpt,
                                    const TrainConfig& cfg) {
  const StftConfig sc = stft_config(cfg);
  std::vector<SplitRow> rows;
  for (const auto& e : manifest.entries) {
    const Waveform clean = read_wav(e.clean_path);
    const Tensor clean_mag = magnitude(stft(clean, sc));
    const OracleResult o = dfkd_division_point(clean_mag, oracle_settings(cfg));
    SplitRow r;
    r.utterance_id = e.utterance_id;
    r.oracle_bin = o.point.bin();
    r.oracle_hz = o.point.hz(clean.sample_rate);
    r.fallback = o.fallback;
    if (ckpt != nullptr) {
      const Tensor noisy_mag = magnitude(stft(read_wav(e.noisy_path), sc));
      const double f =
          ckpt->models.splitter.forward(noisy_mag, ckpt->models.generator.forward(noisy_mag));
      const DivisionPoint m = DivisionPoint::from_fraction(f, sc.bins());
      r.m_hat_bin = m.bin();
      r.m_hat_hz = m.hz(clean.sample_rate);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_split_table(std::ostream& out, const std::vector<SplitRow>& rows) {
  out << "utterance_id\toracle_bin\toracle_hz\tfallback\tm_hat_bin\tm_hat_hz\n";
  for (const auto& r : rows) {
    out << r.utterance_id << '\t' << r.oracle_bin << '\t' << r.oracle_hz << '\t'
        << (r.fallback ? "yes" : "no") << '\t';
    if (r.m_hat_bin)
      out << *r.m_hat_bin << '\t' << *r.m_hat_hz << '\n';
    else
      out << "-\t-\n";
  }
}

}  // namespace sad
