// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sad/signal.hpp"

namespace sad::plot {

inline constexpr double kDynamicRangeDb = 80.0;

/// [frames x bins] log-magnitude in dB (20 log10(|X| + 1e-10)).
Tensor log_spectrogram(const Waveform& w, const StftConfig& cfg = {});

/// Upper end of the colour scale shared by every panel: the maximum dB
/// value over all of them. The lower end is that minus kDynamicRangeDb.
double shared_color_max(const std::vector<Tensor>& panels);

/// Row (from the top of a panel `bins` pixels tall, low frequencies at
/// the bottom) on which a line at `hz` is drawn.
int division_row(double hz, std::size_t bins, int sample_rate);

/// Three side-by-side spectrograms (noisy, enhanced, enhanced with the
/// scenario-aware discriminator) with time/frequency axes and an optional
/// horizontal line at the division frequency. Throws InvalidInput when
/// the durations differ.
void plot_triptych(const Waveform& noisy, const Waveform& enhanced,
                   const Waveform& enhanced_sad, std::optional<double> division_hz,
                   const std::filesystem::path& out_png);

}  // namespace sad::plot
