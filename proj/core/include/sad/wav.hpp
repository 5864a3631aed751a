// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "sad/signal.hpp"

namespace sad {

inline constexpr int kCanonicalSampleRate = 16000;

struct WavReadOptions {
  // Strict mode rejects files whose rate differs from target_rate; otherwise
  // they are resampled by linear interpolation.
  bool strict = true;
  int target_rate = kCanonicalSampleRate;
};

/// Reads a RIFF/WAVE file holding mono 16-bit little-endian PCM. Samples
/// are scaled to [-1, 1) by 1/32768.
Waveform read_wav(const std::filesystem::path& path, const WavReadOptions& opts = {});

/// Writes mono 16-bit PCM; samples are clipped to [-1, 1] and rounded to
/// nearest.
void write_wav(const std::filesystem::path& path, const Waveform& wave);

Waveform resample_linear(const Waveform& wave, int target_rate);

}  // namespace sad
