// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "sad/nets/params.hpp"
#include "sad/random.hpp"

namespace sad {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidInput("unknown split '" + s + "' (expected train, val or test)");
}

Split split_for_id(const std::string& id) {
  const auto r = nets::fnv1a(id.data(), id.size()) % 10;
  if (r < 8) return Split::kTrain;
  return r == 8 ? Split::kVal : Split::kTest;
}

std::vector<ManifestEntry> Manifest::of(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(e);
  return out;
}

// ------------------------------------------------------------------ synthesis

Waveform synth_speech(double duration_s, std::uint64_t seed, int sample_rate) {
  SpeechOptions o;
  o.sample_rate = sample_rate;
  return synth_speech(duration_s, seed, o);
}

Waveform synth_speech(double duration_s, std::uint64_t seed, const SpeechOptions& opts) {
  const int sample_rate = opts.sample_rate;
  if (!(duration_s > 0.0)) throw InvalidInput("synth_speech: duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  const double sr = sample_rate;
  std::mt19937_64 rng(seed);

  // Intonation on a 10 ms grid: log f0 follows a mean-reverting walk around
  // a per-speaker base pitch (stationary spread about 15%).
  const std::size_t step = static_cast<std::size_t>(sr / 100.0);
  std::vector<double> f0_grid(n / step + 2);
  const double base_f0 = uniform(rng, 110.0, 200.0);
  double x = 0.0;
  for (auto& v : f0_grid) {
    v = std::clamp(base_f0 * std::exp(x), 70.0, 300.0);
    x = 0.98 * x + 0.03 * normal01(rng);
  }

  constexpr double kFormantLo[3] = {500.0, 1200.0, 2400.0};
  constexpr double kFormantHi[3] = {800.0, 2000.0, 3200.0};
  double formants[3];
  for (int i = 0; i < 3; ++i) formants[i] = uniform(rng, kFormantLo[i], kFormantHi[i]);
  const double widths[3] = {uniform(rng, 250.0, 400.0), uniform(rng, 300.0, 500.0),
                            uniform(rng, 350.0, 550.0)};
  const double gains[3] = {1.0, uniform(rng, 0.5, 0.8), uniform(rng, 0.3, 0.5)};
  const double am_rate = uniform(rng, 2.0, 6.0);
  const double am_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  // Upper edge of the voiced band; harmonics fade out over the last kFade Hz.
  constexpr double kFade = 300.0;
  const double drawn_cutoff = uniform(rng, 3000.0, 4300.0);
  const double cutoff = opts.band_edge_hz.value_or(drawn_cutoff);
  if (!(cutoff > 400.0 && cutoff < sr / 2.0))
    throw InvalidInput("synth_speech: band edge must lie in (400 Hz, Nyquist)");

  // Formants wander like the f0 track so the long-term spectrum is not
  // that of one frozen vowel.
  std::vector<std::array<double, 3>> formant_grid(f0_grid.size());
  for (auto& fg : formant_grid)
    for (int i = 0; i < 3; ++i) {
      fg[i] = formants[i];
      formants[i] += 0.05 * (kFormantHi[i] - kFormantLo[i]) * normal01(rng);
      if (formants[i] < kFormantLo[i]) formants[i] = 2.0 * kFormantLo[i] - formants[i];
      if (formants[i] > kFormantHi[i]) formants[i] = 2.0 * kFormantHi[i] - formants[i];
    }

  auto envelope = [&](double f, const std::array<double, 3>& fm) {
    if (f >= cutoff) return 0.0;
    double e = 0.15;
    for (int i = 0; i < 3; ++i) {
      const double z = (f - fm[i]) / widths[i];
      e += gains[i] * std::exp(-0.5 * z * z);
    }
    e /= 1.0 + std::pow(f / (cutoff - 400.0), 8.0);
    if (f > cutoff - kFade)
      e *= 0.5 * (1.0 + std::cos(std::numbers::pi * (f - cutoff + kFade) / kFade));
    return e;
  };

  // Harmonic amplitudes on the f0 grid, interpolated per sample.
  const int max_h = static_cast<int>(cutoff / 70.0) + 1;
  std::vector<double> amps(f0_grid.size() * static_cast<std::size_t>(max_h));
  for (std::size_t g = 0; g < f0_grid.size(); ++g)
    for (int h = 1; h <= max_h; ++h)
      amps[g * static_cast<std::size_t>(max_h) + static_cast<std::size_t>(h - 1)] =
          envelope(h * f0_grid[g], formant_grid[g]);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i / step;
    const double frac = static_cast<double>(i % step) / static_cast<double>(step);
    const double f = f0_grid[g] + frac * (f0_grid[g + 1] - f0_grid[g]);
    phase += 2.0 * std::numbers::pi * f / sr;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    const double* a0 = &amps[g * static_cast<std::size_t>(max_h)];
    const double* a1 = a0 + max_h;
    double s = 0.0;
    for (int h = 1; h <= max_h; ++h) {
      const double a = a0[h - 1] + frac * (a1[h - 1] - a0[h - 1]);
      if (a != 0.0) s += a * std::sin(h * phase);
    }
    const double t = static_cast<double>(i) / sr;
    const double am = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * am_rate * t + am_phase);
    w.samples[i] = am * s;
  }
  double peak = 0.0;
  for (double v : w.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : w.samples) v *= 0.5 / peak;
  return w;
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kWhite:
      return "white";
    case NoiseKind::kPink:
      return "pink";
    case NoiseKind::kBandLimitedHigh:
      return "band_limited_high";
  }
  return "white";
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white") return NoiseKind::kWhite;
  if (s == "pink") return NoiseKind::kPink;
  if (s == "band_limited_high") return NoiseKind::kBandLimitedHigh;
  throw InvalidInput("unknown noise kind '" + s + "'");
}

Waveform synth_noise(NoiseKind kind, double duration_s, std::uint64_t seed, int sample_rate) {
  if (!(duration_s > 0.0)) throw InvalidInput("synth_noise: duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::mt19937_64 rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  for (double& v : w.samples) v = normal01(rng);
  if (kind != NoiseKind::kWhite && n >= 2) {
    auto spec = rfft(w.samples);
    const double df = static_cast<double>(sample_rate) / static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * df;
      if (kind == NoiseKind::kPink)
        spec[k] *= 1.0 / std::sqrt(std::max(f, 20.0) / 20.0);
      else if (f < 3000.0)
        spec[k] = 0.0;
    }
    w.samples = inverse_rfft(spec, n);
  }
  const double rms =
      std::sqrt(energy(w.samples) / static_cast<double>(std::max<std::size_t>(n, 1)));
  if (rms > 0.0)
    for (double& v : w.samples) v /= rms;
  return w;
}

// ------------------------------------------------------------------ manifest

namespace {

[[noreturn]] void throw_issues(const std::string& prefix, const std::string& noun,
                               std::vector<EntryIssue> issues) {
  const std::string what = prefix + std::to_string(issues.size()) + noun + ", first: " +
                           issues.front().utterance_id + ": " + issues.front().reason;
  throw ManifestError(what, std::move(issues));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  const auto r = fs::relative(p, base.empty() ? fs::path(".") : base, ec);
  if (ec || r.empty()) return fs::absolute(p).string();
  return r.generic_string();
}

}  // namespace

void write_manifest(const fs::path& path, const Manifest& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  const fs::path base = path.parent_path();
  out << json{{"snr_max_db", m.snr_max_db}}.dump() << "\n";
  for (const auto& e : m.entries) {
    json j;
    j["utterance_id"] = e.utterance_id;
    j["clean_path"] = relative_to(e.clean_path, base);
    j["noisy_path"] = relative_to(e.noisy_path, base);
    j["snr_db"] = e.snr_db;
    j["duration_s"] = e.duration_s;
    j["split"] = to_string(e.split);
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing manifest: " + path.string());
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  Manifest m;
  m.path = path;
  const fs::path base = path.parent_path();
  bool have_max = false;
  std::string line;
  int lineno = 0;
  std::vector<EntryIssue> issues;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      issues.push_back({"line " + std::to_string(lineno), ex.what()});
      continue;
    }
    if (!j.contains("utterance_id")) {
      if (j.contains("snr_max_db") && j["snr_max_db"].is_number()) {
        m.snr_max_db = j["snr_max_db"].get<double>();
        have_max = true;
      } else {
        issues.push_back({"line " + std::to_string(lineno), "record has no utterance_id"});
      }
      continue;
    }
    try {
      ManifestEntry e;
      e.utterance_id = j.at("utterance_id").get<std::string>();
      e.clean_path = resolve(base, j.at("clean_path").get<std::string>());
      e.noisy_path = resolve(base, j.at("noisy_path").get<std::string>());
      e.snr_db = j.at("snr_db").get<double>();
      e.duration_s = j.value("duration_s", 0.0);
      e.split = j.contains("split") ? parse_split(j["split"].get<std::string>())
                                    : split_for_id(e.utterance_id);
      m.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      issues.push_back({j.value("utterance_id", "line " + std::to_string(lineno)), ex.what()});
    }
  }
  if (!issues.empty())
    throw_issues("manifest " + path.string() + ": ", " malformed record(s)", std::move(issues));
  if (!have_max) {
    m.snr_max_db = 0.0;
    for (const auto& e : m.entries) m.snr_max_db = std::max(m.snr_max_db, e.snr_db);
  }
  return m;
}

void validate_manifest(const Manifest& m) {
  std::vector<EntryIssue> issues;
  for (const auto& e : m.entries) {
    try {
      const Waveform c = read_wav(e.clean_path);
      const Waveform n = read_wav(e.noisy_path);
      if (c.size() != n.size())
        issues.push_back({e.utterance_id, "clean and noisy lengths differ (" +
                                              std::to_string(c.size()) + " vs " +
                                              std::to_string(n.size()) + ")"});
    } catch (const Error& ex) {
      issues.push_back({e.utterance_id, ex.what()});
    }
  }
  if (!issues.empty()) throw_issues("", " invalid manifest entries", std::move(issues));
}

Manifest build_corpus(const CorpusOptions& o, const fs::path& out_dir) {
  if (o.n_utterances < 1) throw InvalidInput("build_corpus: need at least one utterance");
  if (!(o.snr_lo_db <= o.snr_hi_db))
    throw InvalidInput("build_corpus: snr_lo must be <= snr_hi");
  std::error_code ec;
  fs::create_directories(out_dir / "clean", ec);
  fs::create_directories(out_dir / "noisy", ec);
  if (ec || !fs::is_directory(out_dir / "clean"))
    throw IoError("cannot create corpus directory: " + out_dir.string());

  Manifest m;
  m.path = out_dir / "manifest.jsonl";
  std::mt19937_64 rng(derive_seed(o.seed, 0));
  for (int i = 0; i < o.n_utterances; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "utt%05d", i);
    const double snr = o.snr_lo_db == o.snr_hi_db ? o.snr_lo_db
                                                  : uniform(rng, o.snr_lo_db, o.snr_hi_db);
    const auto kind = static_cast<NoiseKind>(uniform_index(rng, 3));
    Waveform clean = synth_speech(o.duration_s, derive_seed(o.seed, 2 * i + 1));
    const Waveform noise = synth_noise(kind, o.duration_s, derive_seed(o.seed, 2 * i + 2));
    Waveform noisy = mix_at_snr(clean, noise, snr);
    double peak = 0.0;
    for (double v : noisy.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.99) {
      const double g = 0.99 / peak;
      for (double& v : clean.samples) v *= g;
      for (double& v : noisy.samples) v *= g;
    }
    ManifestEntry e;
    e.utterance_id = id;
    e.clean_path = out_dir / "clean" / (std::string(id) + ".wav");
    e.noisy_path = out_dir / "noisy" / (std::string(id) + ".wav");
    e.snr_db = snr;
    e.duration_s = clean.duration_s();
    e.split = split_for_id(id);
    write_wav(e.clean_path, clean);
    write_wav(e.noisy_path, noisy);
    m.entries.push_back(std::move(e));
  }
  m.snr_max_db = 0.0;
  for (const auto& e : m.entries) m.snr_max_db = std::max(m.snr_max_db, e.snr_db);
  write_manifest(m.path, m);
  return m;
}

IngestResult ingest_pairs(const fs::path& clean_dir, const fs::path& noisy_dir,
                          const fs::path& manifest_path, const WavReadOptions& read_opts) {
  if (!fs::is_directory(clean_dir)) throw IoError("not a directory: " + clean_dir.string());
  if (!fs::is_directory(noisy_dir)) throw IoError("not a directory: " + noisy_dir.string());
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(clean_dir))
    if (de.is_regular_file() && de.path().extension() == ".wav") files.push_back(de.path());
  std::sort(files.begin(), files.end());

  IngestResult r;
  r.manifest.path = manifest_path;
  for (const auto& cp : files) {
    const std::string id = cp.stem().string();
    const fs::path np = noisy_dir / cp.filename();
    try {
      if (!fs::exists(np)) throw IoError("no noisy counterpart " + np.string());
      const Waveform c = read_wav(cp, read_opts);
      const Waveform n = read_wav(np, read_opts);
      if (c.size() != n.size()) throw InvalidInput("clean and noisy lengths differ");
      std::vector<double> diff(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) diff[i] = n.samples[i] - c.samples[i];
      if (energy(c.samples) == 0.0) throw InvalidInput("clean reference is silent");
      if (energy(diff) == 0.0) throw InvalidInput("noisy equals clean; SNR is unbounded");
      ManifestEntry e;
      e.utterance_id = id;
      e.clean_path = cp;
      e.noisy_path = np;
      e.snr_db = snr_db(c.samples, diff);
      e.duration_s = c.duration_s();
      e.split = split_for_id(id);
      r.manifest.entries.push_back(std::move(e));
    } catch (const Error& ex) {
      r.rejected.push_back({id, ex.what()});
    }
  }
  for (const auto& e : r.manifest.entries)
    r.manifest.snr_max_db = std::max(r.manifest.snr_max_db, e.snr_db);
  write_manifest(manifest_path, r.manifest);
  return r;
}

// ------------------------------------------------------------------ loading

std::vector<Utterance> load_utterances(const std::vector<ManifestEntry>& entries,
                                       const StftConfig& cfg, const OracleSettings& oracle) {
  std::vector<Utterance> out;
  out.reserve(entries.size());
  std::vector<EntryIssue> issues;
  for (const auto& e : entries) {
    try {
      const Waveform c = read_wav(e.clean_path);
      const Waveform n = read_wav(e.noisy_path);
      if (c.size() != n.size()) throw InvalidInput("clean and noisy lengths differ");
      Utterance u;
      u.id = e.utterance_id;
      u.clean_mag = magnitude(stft(c, cfg));
      u.noisy_mag = magnitude(stft(n, cfg));
      u.snr_db = e.snr_db;
      u.oracle = dfkd_division_point(u.clean_mag, oracle);
      out.push_back(std::move(u));
    } catch (const Error& ex) {
      issues.push_back({e.utterance_id, ex.what()});
    }
  }
  if (!issues.empty()) throw_issues("cannot load ", " utterance(s)", std::move(issues));
  return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed) {
  if (batch_size == 0) throw InvalidInput("batch size must be positive");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  return out;
}

std::vector<Batch> batch_iterator(const std::vector<Utterance>& utts, std::size_t batch_size,
                                  std::uint64_t seed) {
  std::vector<Batch> out;
  for (const auto& idx : batch_indices(utts.size(), batch_size, seed)) {
    Batch b;
    for (auto i : idx) b.items.push_back(&utts[i]);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace sad
