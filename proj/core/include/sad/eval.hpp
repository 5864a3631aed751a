// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sad/checkpoint.hpp"
#include "sad/config.hpp"
#include "sad/data.hpp"

namespace sad {

/// Config stored in a checkpoint's metadata (defaults when absent).
TrainConfig checkpoint_config(const Checkpoint& ckpt);

/// stft -> generator mask -> noisy phase -> istft, cut or zero-padded to
/// the input length. Inputs shorter than one window come back as zeros.
Waveform enhance_waveform(const nets::Generator& generator, const Waveform& noisy,
                          const StftConfig& cfg);

void enhance_file(const Checkpoint& ckpt, const std::filesystem::path& in_wav,
                  const std::filesystem::path& out_wav);

struct UtteranceMetrics {
  std::string utterance_id;
  double snr_db = 0.0;
  double si_sdr_noisy = 0.0;
  double si_sdr_enhanced = 0.0;
  double si_sdr_improvement = 0.0;
  double seg_snr_noisy = 0.0;
  double seg_snr_enhanced = 0.0;
  double seg_snr_improvement = 0.0;
  double bak = 0.0;  // proxies of the enhanced vs clean spectra at the oracle split
  double sig = 0.0;
  double ovl = 0.0;
  std::optional<double> m_hat_hz;
  double oracle_hz = 0.0;
  bool oracle_fallback = false;
  std::string error;  // non-empty when the entry failed; metrics are then unset
};

struct Aggregate {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
};

/// Metric names accepted by aggregate(): si_sdr_improvement,
/// seg_snr_improvement, si_sdr_enhanced, bak, sig, ovl, m_hat_hz.
Aggregate aggregate(const std::vector<UtteranceMetrics>& rows, const std::string& metric);
const std::vector<std::string>& aggregate_metrics();

struct MetricsReport {
  std::string config_hash;
  std::string checkpoint_id;
  std::string variant;
  std::vector<std::string> ablations;
  std::string split;
  std::vector<UtteranceMetrics> rows;
  std::vector<UtteranceMetrics> identity_rows;  // enhanced := noisy
};

/// Enhances and scores every entry of `split`; failures are recorded per
/// row instead of aborting the report.
MetricsReport evaluate(const Checkpoint& ckpt, const Manifest& manifest, Split split);

/// JSON with "rows", "identity_rows", "aggregate", "identity_aggregate" and
/// null placeholder columns for external pesq/stoi/csig/cbak/covl scores.
std::string report_json(const MetricsReport& report);
void write_report(const std::filesystem::path& path, const MetricsReport& report);

struct SplitRow {
  std::string utterance_id;
  std::size_t oracle_bin = 0;
  double oracle_hz = 0.0;
  bool fallback = false;
  std::optional<std::size_t> m_hat_bin;
  std::optional<double> m_hat_hz;
};

/// Oracle division points of every manifest entry, plus the splitter's
/// prediction when a checkpoint is given.
std::vector<SplitRow> split_inspect(const Manifest& manifest, const Checkpoint* ckpt,
                                    const TrainConfig& cfg);
void write_split_table(std::ostream& out, const std::vector<SplitRow>& rows);

}  // namespace sad
