// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "sad/band_split.hpp"
#include "sad/error.hpp"

namespace sad::plot {

namespace {

constexpr int kPanelW = 560;
constexpr int kPanelH = 360;
constexpr int kLeft = 70;
constexpr int kRight = 20;
constexpr int kTop = 40;
constexpr int kBottom = 50;
constexpr int kGap = 60;

const cv::Scalar kInk(30, 30, 30);
const cv::Scalar kLine(255, 255, 255);

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.5) {
  cv::putText(img, s, at, cv::FONT_HERSHEY_SIMPLEX, scale, kInk, 1, cv::LINE_AA);
}

cv::Mat render_panel(const Tensor& db, double vmax) {
  const int frames = static_cast<int>(db.dim(0));
  const int bins = static_cast<int>(db.dim(1));
  const double vmin = vmax - kDynamicRangeDb;
  cv::Mat gray(bins, frames, CV_8UC1);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < bins; ++k) {
      const double v = std::clamp((db.at(t, k) - vmin) / (vmax - vmin), 0.0, 1.0);
      gray.at<std::uint8_t>(bins - 1 - k, t) = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  cv::Mat color, scaled;
  cv::applyColorMap(gray, color, cv::COLORMAP_MAGMA);
  cv::resize(color, scaled, cv::Size(kPanelW, kPanelH), 0, 0, cv::INTER_NEAREST);
  return scaled;
}

}  // namespace

Tensor log_spectrogram(const Waveform& w, const StftConfig& cfg) {
  Tensor m = magnitude(stft(w, cfg));
  for (double& v : m.values()) v = 20.0 * std::log10(v + 1e-10);
  return m;
}

double shared_color_max(const std::vector<Tensor>& panels) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : panels)
    for (double v : p.values()) vmax = std::max(vmax, v);
  return vmax;
}

int division_row(double hz, std::size_t bins, int sample_rate) {
  const double k = hz / bin_hz(bins, sample_rate);
  return static_cast<int>(bins) - 1 - static_cast<int>(std::lround(k));
}

void plot_triptych(const Waveform& noisy, const Waveform& enhanced, const Waveform& sad,
                   std::optional<double> division_hz, const std::filesystem::path& out_png) {
  if (noisy.size() != enhanced.size() || noisy.size() != sad.size() ||
      noisy.sample_rate != enhanced.sample_rate || noisy.sample_rate != sad.sample_rate)
    throw InvalidInput("plot: the three signals must have equal durations and rates");
  const StftConfig cfg;
  const std::vector<Tensor> panels = {log_spectrogram(noisy, cfg), log_spectrogram(enhanced, cfg),
                                      log_spectrogram(sad, cfg)};
  const double vmax = shared_color_max(panels);
  const char* titles[3] = {"noisy", "enhanced", "enhanced (scenario-aware D)"};
  const int width = kLeft + 3 * kPanelW + 2 * kGap + kRight;
  const int height = kTop + kPanelH + kBottom;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  const std::size_t bins = panels[0].dim(1);
  const double nyquist = noisy.sample_rate / 2.0;
  const double seconds = noisy.duration_s();
  for (int p = 0; p < 3; ++p) {
    const int x0 = kLeft + p * (kPanelW + kGap);
    render_panel(panels[p], vmax).copyTo(canvas(cv::Rect(x0, kTop, kPanelW, kPanelH)));
    cv::rectangle(canvas, cv::Rect(x0 - 1, kTop - 1, kPanelW + 2, kPanelH + 2), kInk);
    text(canvas, titles[p], cv::Point(x0, kTop - 12), 0.55);

    for (double khz = 0.0; khz <= nyquist / 1000.0 + 1e-9; khz += 2.0) {
      const int y =
          kTop + kPanelH - static_cast<int>(std::lround(khz * 1000.0 / nyquist * kPanelH));
      cv::line(canvas, cv::Point(x0 - 5, y), cv::Point(x0, y), kInk);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%g", khz);
      text(canvas, buf, cv::Point(x0 - 22, y + 5), 0.4);
    }
    const double tick = seconds > 4.0 ? 1.0 : 0.5;
    for (double s = 0.0; s <= seconds + 1e-9; s += tick) {
      const int x = x0 + static_cast<int>(std::lround(s / seconds * kPanelW));
      cv::line(canvas, cv::Point(x, kTop + kPanelH), cv::Point(x, kTop + kPanelH + 5), kInk);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%g", s);
      text(canvas, buf, cv::Point(x - 6, kTop + kPanelH + 20), 0.4);
    }
    text(canvas, "time (s)", cv::Point(x0 + kPanelW / 2 - 30, height - 8), 0.45);
    if (division_hz) {
      const int row = division_row(*division_hz, bins, noisy.sample_rate);
      const int y = kTop + static_cast<int>(std::lround((row + 0.5) / bins * kPanelH));
      cv::line(canvas, cv::Point(x0, y), cv::Point(x0 + kPanelW - 1, y), kLine, 2);
    }
  }
  cv::Mat label(20, 120, CV_8UC3, cv::Scalar(255, 255, 255));
  text(label, "freq (kHz)", cv::Point(2, 15), 0.45);
  cv::Mat rotated;
  cv::rotate(label, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
  rotated.copyTo(canvas(cv::Rect(4, kTop + kPanelH / 2 - 60, rotated.cols, rotated.rows)));

  if (out_png.has_parent_path()) std::filesystem::create_directories(out_png.parent_path());
  if (!cv::imwrite(out_png.string(), canvas))
    throw IoError("cannot write image: " + out_png.string());
}

}  // namespace sad::plot
