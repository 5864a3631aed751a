// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "sad/error.hpp"
#include "sad/nets/params.hpp"

namespace sad {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config: bad value '" + s + "' for " + key);
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: bad boolean '" + s + "' for " + key);
}

struct Field {
  const char* name;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

#define SAD_INT_FIELD(f)                                                              \
  Field {                                                                             \
    #f, [](const TrainConfig& c) { return std::to_string(c.f); },                     \
        [](TrainConfig& c, const std::string& s) { c.f = parse_number<int>(#f, s); } \
  }
#define SAD_DOUBLE_FIELD(f)                                                              \
  Field {                                                                                \
    #f, [](const TrainConfig& c) { return fmt(c.f); },                                   \
        [](TrainConfig& c, const std::string& s) { c.f = parse_number<double>(#f, s); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SAD_INT_FIELD(epochs),
      SAD_INT_FIELD(k_supervised),
      SAD_INT_FIELD(batch_size),
      SAD_DOUBLE_FIELD(learning_rate),
      SAD_DOUBLE_FIELD(gamma),
      SAD_DOUBLE_FIELD(lambda_adv),
      SAD_DOUBLE_FIELD(temperature_start),
      SAD_DOUBLE_FIELD(temperature_end),
      Field{"temperature_decay",
            [](const TrainConfig& c) {
              return std::string(c.temperature_decay == TemperatureDecay::kGeometric
                                     ? "geometric"
                                     : "linear");
            },
            [](TrainConfig& c, const std::string& s) {
              if (s == "geometric")
                c.temperature_decay = TemperatureDecay::kGeometric;
              else if (s == "linear")
                c.temperature_decay = TemperatureDecay::kLinear;
              else
                throw ConfigError("config: temperature_decay must be geometric or linear");
            }},
      Field{"seed", [](const TrainConfig& c) { return std::to_string(c.seed); },
            [](TrainConfig& c, const std::string& s) {
              c.seed = parse_number<std::uint64_t>("seed", s);
            }},
      Field{"bak_weight_direction",
            [](const TrainConfig& c) {
              return std::string(c.bak_weight_direction == BakWeightDirection::kFormula
                                     ? "formula"
                                     : "prose");
            },
            [](TrainConfig& c, const std::string& s) {
              if (s == "formula")
                c.bak_weight_direction = BakWeightDirection::kFormula;
              else if (s == "prose")
                c.bak_weight_direction = BakWeightDirection::kProse;
              else
                throw ConfigError("config: bak_weight_direction must be formula or prose");
            }},
      SAD_DOUBLE_FIELD(snr_max_db),
      SAD_INT_FIELD(crop_frames),
      Field{"discriminator_mode",
            [](const TrainConfig& c) {
              return std::string(c.discriminator_mode == DiscriminatorMode::kScenarioAware
                                     ? "sad"
                                     : "fullband");
            },
            [](TrainConfig& c, const std::string& s) {
              if (s == "sad")
                c.discriminator_mode = DiscriminatorMode::kScenarioAware;
              else if (s == "fullband")
                c.discriminator_mode = DiscriminatorMode::kFullBand;
              else
                throw ConfigError("config: discriminator_mode must be sad or fullband");
            }},
      Field{"alpha_mode",
            [](const TrainConfig& c) {
              return std::string(c.alpha_mode == AlphaMode::kSnr ? "snr" : "fixed");
            },
            [](TrainConfig& c, const std::string& s) {
              if (s == "snr")
                c.alpha_mode = AlphaMode::kSnr;
              else if (s == "fixed")
                c.alpha_mode = AlphaMode::kFixed;
              else
                throw ConfigError("config: alpha_mode must be snr or fixed");
            }},
      SAD_DOUBLE_FIELD(fixed_alpha),
      Field{"pretrain",
            [](const TrainConfig& c) { return std::string(c.pretrain ? "true" : "false"); },
            [](TrainConfig& c, const std::string& s) { c.pretrain = parse_bool("pretrain", s); }},
      SAD_INT_FIELD(pretrain_epochs),
      SAD_INT_FIELD(pretrain_levels),
      SAD_INT_FIELD(pretrain_utterances),
      SAD_DOUBLE_FIELD(search_lo_hz),
      SAD_DOUBLE_FIELD(search_hi_hz),
      SAD_INT_FIELD(fft_size),
      SAD_INT_FIELD(hop),
  };
  return table;
}

#undef SAD_INT_FIELD
#undef SAD_DOUBLE_FIELD

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (k_supervised < 0 || k_supervised > epochs)
    throw ConfigError("config: k_supervised must lie in [0, epochs]");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("config: learning_rate must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("config: gamma must be non-negative");
  if (!(lambda_adv >= 0.0)) throw ConfigError("config: lambda_adv must be non-negative");
  if (!(temperature_end > 0.0) || !(temperature_start >= temperature_end))
    throw ConfigError("config: need temperature_start >= temperature_end > 0");
  if (!(fixed_alpha >= 0.0 && fixed_alpha <= 1.0))
    throw ConfigError("config: fixed_alpha must lie in [0, 1]");
  if (crop_frames < 0) throw ConfigError("config: crop_frames must be >= 0");
  if (pretrain_epochs < 0 || pretrain_levels < 1 || pretrain_utterances < 0)
    throw ConfigError("config: bad pretraining settings");
  if (!(search_lo_hz > 0.0 && search_lo_hz < search_hi_hz))
    throw ConfigError("config: need 0 < search_lo_hz < search_hi_hz");
  if (fft_size < 2 || fft_size % 2 != 0 || hop < 1 || hop > fft_size)
    throw ConfigError("config: bad STFT sizes");
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.name) + "=" + f.get(*this) + "\n";
  return out;
}

std::uint64_t TrainConfig::hash() const {
  const std::string text = to_text();
  return nets::fnv1a(text.data(), text.size());
}

std::vector<std::string> TrainConfig::ablations() const {
  std::vector<std::string> out;
  if (discriminator_mode == DiscriminatorMode::kFullBand) {
    out.push_back("single_fullband_discriminator");
  } else {
    if (k_supervised == 0) out.push_back("no_weak_supervision");
    if (alpha_mode == AlphaMode::kFixed) out.push_back("no_snr_weight");
  }
  if (!pretrain) out.push_back("no_disc_pretrain");
  return out;
}

std::string TrainConfig::variant() const {
  const auto abl = ablations();
  if (abl.empty()) return "sad";
  std::string s = "sad";
  for (const auto& a : abl) s += "+" + a;
  return s;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (key == f.name) {
      f.set(cfg, value);
      return;
    }
  throw ConfigError("config: unknown key '" + key + "'");
}

TrainConfig parse_config(const std::string& text, TrainConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    set_config_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

double temperature_at(const TrainConfig& cfg, int epoch) {
  if (cfg.epochs <= 1) return cfg.temperature_end;
  const double u = std::clamp(static_cast<double>(epoch - 1) / (cfg.epochs - 1), 0.0, 1.0);
  if (cfg.temperature_decay == TemperatureDecay::kLinear)
    return cfg.temperature_start + u * (cfg.temperature_end - cfg.temperature_start);
  return cfg.temperature_start * std::pow(cfg.temperature_end / cfg.temperature_start, u);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace sad
