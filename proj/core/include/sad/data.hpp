// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sad/band_split.hpp"
#include "sad/error.hpp"
#include "sad/signal.hpp"
#include "sad/wav.hpp"

namespace sad {

enum class Split { kTrain, kVal, kTest };
std::string to_string(Split s);
Split parse_split(const std::string& s);

/// 80/10/10 partition by FNV-1a of the utterance id: residues 0-7 train,
/// 8 val, 9 test.
Split split_for_id(const std::string& utterance_id);

struct ManifestEntry {
  std::string utterance_id;
  std::filesystem::path clean_path;  // resolved against the manifest directory
  std::filesystem::path noisy_path;
  double snr_db = 0.0;
  double duration_s = 0.0;
  Split split = Split::kTrain;
};

struct Manifest {
  std::filesystem::path path;
  double snr_max_db = 0.0;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> of(Split s) const;
};

struct EntryIssue {
  std::string utterance_id;
  std::string reason;
};

/// Manifest failed validation; issues() names every offending entry.
class ManifestError : public IoError {
 public:
  ManifestError(const std::string& what, std::vector<EntryIssue> issues)
      : IoError(what), issues_(std::move(issues)) {}
  const std::vector<EntryIssue>& issues() const { return issues_; }

 private:
  std::vector<EntryIssue> issues_;
};

struct SpeechOptions {
  std::optional<double> band_edge_hz;  // unset: drawn per utterance from 3.0-4.3 kHz
  int sample_rate = kCanonicalSampleRate;
};

/// Harmonic "speech": f0 wandering around a 110-200 Hz base pitch,
/// harmonics under three drifting formant bumps up to a band edge, 2-6 Hz
/// syllabic amplitude modulation, peak 0.5.
Waveform synth_speech(double duration_s, std::uint64_t seed, const SpeechOptions& opts);
Waveform synth_speech(double duration_s, std::uint64_t seed,
                      int sample_rate = kCanonicalSampleRate);

enum class NoiseKind {
  kWhite,            // flat spectrum
  kPink,             // power ~ 1/f (amplitude shaped by 1/sqrt(f) above 20 Hz)
  kBandLimitedHigh,  // white above 3 kHz, nothing below
};
std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& s);

/// Unit-RMS seeded noise of the given kind.
Waveform synth_noise(NoiseKind kind, double duration_s, std::uint64_t seed,
                     int sample_rate = kCanonicalSampleRate);

struct CorpusOptions {
  int n_utterances = 200;
  double snr_lo_db = 0.0;
  double snr_hi_db = 20.0;
  double duration_s = 6.0;
  std::uint64_t seed = 7;
};

/// Writes clean/ and noisy/ 16-bit WAV pairs plus manifest.jsonl under
/// out_dir and returns the loaded manifest. Noise kinds rotate at random
/// over white, pink and band-limited-high.
Manifest build_corpus(const CorpusOptions& opts, const std::filesystem::path& out_dir);

/// Manifest format (newline-delimited JSON): an optional first record
/// {"snr_max_db": x}, then one record per utterance with the fields
/// utterance_id, clean_path, noisy_path (relative to the manifest
/// directory or absolute), snr_db, duration_s, split.
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Checks that every entry's files exist, are mono at the canonical rate
/// and of equal length. Throws ManifestError listing every failure.
void validate_manifest(const Manifest& manifest);

struct IngestResult {
  Manifest manifest;
  std::vector<EntryIssue> rejected;
};

/// Pairs same-named WAVs in clean_dir and noisy_dir, estimates each SNR
/// from noisy - clean, and writes a manifest. Pairs that fail validation
/// are skipped and reported.
IngestResult ingest_pairs(const std::filesystem::path& clean_dir,
                          const std::filesystem::path& noisy_dir,
                          const std::filesystem::path& manifest_path,
                          const WavReadOptions& read_opts = {});

/// An utterance loaded into the magnitude domain with its oracle label.
struct Utterance {
  std::string id;
  Tensor clean_mag;  // [frames x bins]
  Tensor noisy_mag;
  double snr_db = 0.0;
  OracleResult oracle{DivisionPoint(1, 2)};
};

std::vector<Utterance> load_utterances(const std::vector<ManifestEntry>& entries,
                                       const StftConfig& stft_cfg,
                                       const OracleSettings& oracle = {});

/// Seeded permutation of [0, n) cut into ceil(n / batch_size) batches; the
/// last batch may be short.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed);

struct Batch {
  std::vector<const Utterance*> items;
};
std::vector<Batch> batch_iterator(const std::vector<Utterance>& utterances,
                                  std::size_t batch_size, std::uint64_t seed);

}  // namespace sad
