// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sad/error.hpp"
#include "sad/wav.hpp"
#include "test_util.hpp"

namespace sad {
namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

// Hand-built PCM file; independent of write_wav.
std::string pcm_bytes(const std::vector<std::int16_t>& samples, std::uint32_t rate,
                      std::uint16_t channels, std::uint16_t bits = 16) {
  std::string data;
  for (auto v : samples) put_u16(data, static_cast<std::uint16_t>(v));
  std::string s = "RIFF";
  put_u32(s, static_cast<std::uint32_t>(36 + data.size()));
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);
  put_u16(s, channels);
  put_u32(s, rate);
  put_u32(s, rate * channels * bits / 8);
  put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(s, bits);
  s += "data";
  put_u32(s, static_cast<std::uint32_t>(data.size()));
  return s + data;
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

TEST(Wav, ReadsHandBuiltFile) {
  test::TempDir dir("wav");
  write_bytes(dir / "a.wav", pcm_bytes({0, 16384, -32768, 32767}, 16000, 1));
  const Waveform w = read_wav(dir / "a.wav");
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w.sample_rate, 16000);
  EXPECT_EQ(w.samples[0], 0.0);
  EXPECT_EQ(w.samples[1], 0.5);
  EXPECT_EQ(w.samples[2], -1.0);
  EXPECT_EQ(w.samples[3], 32767.0 / 32768.0);
}

TEST(Wav, RoundTripWithinOneLsb) {
  test::TempDir dir("wav");
  Waveform w;
  std::mt19937_64 rng(3);
  w.samples.resize(3000);
  for (auto& v : w.samples) v = uniform(rng, -0.9, 0.9);
  write_wav(dir / "rt.wav", w);
  const Waveform r = read_wav(dir / "rt.wav");
  ASSERT_EQ(r.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_LE(std::abs(r.samples[i] - w.samples[i]), 0.5 / 32768.0 + 1e-12);
}

TEST(Wav, ClipsOnWrite) {
  test::TempDir dir("wav");
  Waveform w;
  w.samples = {2.0, -3.0};
  write_wav(dir / "c.wav", w);
  const Waveform r = read_wav(dir / "c.wav");
  EXPECT_EQ(r.samples[0], 32767.0 / 32768.0);
  EXPECT_EQ(r.samples[1], -1.0);
}

TEST(Wav, StrictModeRejectsOtherRates) {
  test::TempDir dir("wav");
  write_bytes(dir / "8k.wav", pcm_bytes(std::vector<std::int16_t>(800, 100), 8000, 1));
  EXPECT_THROW(read_wav(dir / "8k.wav"), IoError);
  WavReadOptions lenient;
  lenient.strict = false;
  const Waveform w = read_wav(dir / "8k.wav", lenient);
  EXPECT_EQ(w.sample_rate, 16000);
  EXPECT_NEAR(static_cast<double>(w.size()), 1600.0, 2.0);
  for (double v : w.samples) EXPECT_NEAR(v, 100.0 / 32768.0, 1e-12);
}

TEST(Wav, RejectsStereoGarbageAndMissing) {
  test::TempDir dir("wav");
  write_bytes(dir / "st.wav", pcm_bytes({1, 2, 3, 4}, 16000, 2));
  EXPECT_THROW(read_wav(dir / "st.wav"), IoError);
  write_bytes(dir / "junk.wav", "this is not audio at all");
  EXPECT_THROW(read_wav(dir / "junk.wav"), IoError);
  std::string truncated = pcm_bytes({1, 2, 3, 4}, 16000, 1);
  truncated.resize(truncated.size() - 4);
  write_bytes(dir / "trunc.wav", truncated);
  EXPECT_THROW(read_wav(dir / "trunc.wav"), IoError);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
}

TEST(Resample, LinearPreservesDuration) {
  Waveform w;
  w.sample_rate = 48000;
  w.samples.resize(48000);
  for (std::size_t i = 0; i < w.size(); ++i) w.samples[i] = static_cast<double>(i) / 48000.0;
  const Waveform r = resample_linear(w, 16000);
  EXPECT_EQ(r.sample_rate, 16000);
  EXPECT_NEAR(r.duration_s(), 1.0, 1e-3);
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    EXPECT_NEAR(r.samples[i], static_cast<double>(i) / 16000.0, 1e-9);
  EXPECT_THROW(resample_linear(w, 0), InvalidInput);
}

}  // namespace
}  // namespace sad
