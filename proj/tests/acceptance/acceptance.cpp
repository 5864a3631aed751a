// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sad/band_split.hpp"
#include "sad/checkpoint.hpp"
#include "sad/data.hpp"
#include "sad/losses.hpp"
#include "sad/mos.hpp"
#include "sad/nets/models.hpp"
#include "sad/random.hpp"
#include "sad/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

sad::Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo,
                          double hi) {
  std::mt19937_64 rng(seed);
  sad::Tensor t = sad::make_matrix(rows, cols);
  for (double& v : t.values()) v = sad::uniform(rng, lo, hi);
  return t;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> read_ndjson(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

// ---------------------------------------------------------------- 1, 2

Outcome equation_fidelity() {
  Stopwatch sw;
  std::mt19937_64 rng(2026);
  double worst_d = 0.0, worst_t = 0.0;
  for (int i = 0; i < 1000; ++i) {
    sad::LossBreakdown p;
    p.loss_m = sad::uniform(rng, 0, 1);
    p.loss_bak = sad::uniform(rng, 0, 16);
    p.loss_sig = sad::uniform(rng, 0, 16);
    p.loss_ovl = sad::uniform(rng, 0, 16);
    const double a = sad::uniform(rng, 0, 1);
    const double manual = a * p.loss_bak + (1 - a) * p.loss_sig + p.loss_ovl + p.loss_m;
    worst_d = std::max(worst_d, std::abs(sad::loss_discriminator(p, a, true) - manual));
    const double g = sad::uniform(rng, 0, 10), d = sad::uniform(rng, 0, 40);
    const double gamma = sad::uniform(rng, 0, 3);
    worst_t = std::max(worst_t, std::abs(sad::loss_total(g, d, gamma) - (g + gamma * d)));
  }
  const double t = sw.seconds();
  return {worst_d <= 1e-9 && worst_t <= 1e-9 && t < 1.0,
          "max |Loss_D err| " + fmt("%.2e", worst_d) + ", max |Loss_total err| " +
              fmt("%.2e", worst_t) + ", " + fmt("%.3f s", t)};
}

Outcome alpha_endpoints() {
  const double a0 = sad::alpha({0.0, 20.0});
  const double a1 = sad::alpha({20.0, 20.0});
  const double am = sad::alpha({10.0, 20.0});
  return {a0 == 0.0 && a1 == 1.0 && am == 0.5,
          "alpha(0)=" + fmt("%g", a0) + " alpha(20)=" + fmt("%g", a1) + " alpha(10)=" +
              fmt("%g", am)};
}

// ---------------------------------------------------------------- 3

constexpr double kFdStep = 1e-5;

double param_fd_error(sad::nets::ModelParams& params, const std::function<double()>& loss) {
  const std::vector<double> analytic = params.flat_grads();
  std::vector<double> flat = params.flat_values();
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double orig = flat[i];
    flat[i] = orig + kFdStep;
    params.set_flat_values(flat);
    const double lp = loss();
    flat[i] = orig - kFdStep;
    params.set_flat_values(flat);
    const double lm = loss();
    flat[i] = orig;
    worst = std::max(worst, rel_err(analytic[i], (lp - lm) / (2 * kFdStep)));
  }
  params.set_flat_values(flat);
  return worst;
}

double input_fd_error(const sad::Tensor& x, const sad::Tensor& analytic,
                      const std::function<double(const sad::Tensor&)>& loss) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sad::Tensor xp = x, xm = x;
    xp[i] += kFdStep;
    xm[i] -= kFdStep;
    worst = std::max(worst, rel_err(analytic[i], (loss(xp) - loss(xm)) / (2 * kFdStep)));
  }
  return worst;
}

double dot(const sad::Tensor& a, const sad::Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Outcome gradient_oracle() {
  Stopwatch sw;
  constexpr std::size_t kFrames = 6, kBins = 24;
  std::map<std::string, double> worst;
  bool small = true;

  {
    sad::nets::Generator::Options o;
    o.bins = kBins;
    sad::nets::Generator g(o, 11);
    const sad::Tensor x = random_matrix(kFrames, kBins, 12, 0.05, 2.0);
    const sad::Tensor w = random_matrix(kFrames, kBins, 13, -1.0, 1.0);
    sad::nets::Generator::Trace tr;
    g.forward(x, &tr);
    g.params().zero_grad();
    g.backward(tr, w);
    worst["G"] = param_fd_error(g.params(), [&] { return dot(w, g.forward(x)); });
    small = small && sad::nets::Generator(1).params().count() <= 5000;
  }
  {
    sad::nets::Splitter f(21);
    const sad::Tensor x = random_matrix(kFrames, kBins, 22, 0.05, 2.0);
    const sad::Tensor y = random_matrix(kFrames, kBins, 23, 0.05, 2.0);
    sad::nets::Splitter::Trace tr;
    f.forward(x, y, &tr);
    f.params().zero_grad();
    const auto in = f.backward(tr, 1.0, true);
    double e = param_fd_error(f.params(), [&] { return f.forward(x, y); });
    e = std::max(e, input_fd_error(x, in.noisy, [&](const sad::Tensor& v) {
      return f.forward(v, y);
    }));
    e = std::max(e, input_fd_error(y, in.enhanced, [&](const sad::Tensor& v) {
      return f.forward(x, v);
    }));
    worst["F"] = e;
    small = small && sad::nets::Splitter(1).params().count() <= 5000;
  }
  const char* names[] = {"D1", "D2", "D3"};
  for (int k = 0; k < 3; ++k) {
    sad::nets::MetricDiscriminator d(31 + k);
    const std::size_t width = k == 0 ? 9 : (k == 1 ? 15 : kBins);
    const sad::Tensor x = random_matrix(kFrames, width, 41 + k, 0.05, 2.0);
    sad::nets::MetricDiscriminator::Trace tr;
    d.forward(x, &tr);
    d.params().zero_grad();
    const sad::Tensor gx = d.backward(tr, 1.0, true);
    double e = param_fd_error(d.params(), [&] { return d.forward(x); });
    e = std::max(e, input_fd_error(x, gx, [&](const sad::Tensor& v) { return d.forward(v); }));
    worst[names[k]] = e;
  }
  small = small && sad::nets::MetricDiscriminator(1).params().count() <= 5000;
  {
    sad::nets::Splitter f(61);
    sad::nets::MetricDiscriminator d1(62), d2(63);
    const sad::Tensor x = random_matrix(kFrames, kBins, 64, 0.05, 2.0);
    const sad::Tensor y = random_matrix(kFrames, kBins, 65, 0.05, 2.0);
    const double temp = 0.05;
    sad::nets::Splitter::Trace ftr;
    const double frac = f.forward(x, y, &ftr);
    const sad::SoftSplit s = sad::soft_split(y, frac, temp);
    sad::nets::MetricDiscriminator::Trace t1, t2;
    d1.forward(s.high, &t1);
    d2.forward(s.low, &t2);
    const sad::Tensor gh = d1.backward(t1, 1.0, true);
    const sad::Tensor gl = d2.backward(t2, 0.7, true);
    const double gfrac = sad::split_fraction_grad(sad::SplitKind::kSoft, &s, y, gl, gh);
    f.params().zero_grad();
    f.backward(ftr, gfrac, false);
    worst["F->split->D"] = param_fd_error(f.params(), [&] {
      const sad::SoftSplit v = sad::soft_split(y, f.forward(x, y), temp);
      return d1.forward(v.high) + 0.7 * d2.forward(v.low);
    });
  }
  const double t = sw.seconds();
  bool ok = small && t < 120.0;
  std::string detail;
  for (const auto& [k, v] : worst) {
    ok = ok && v < 1e-4;
    detail += k + " " + fmt("%.1e", v) + ", ";
  }
  return {ok, detail + (small ? "" : "model over 5k params, ") + fmt("%.1f s", t)};
}

// ---------------------------------------------------------------- 4, 5, 6

Outcome split_algebra() {
  Stopwatch sw;
  bool exact = true;
  double worst = 0.0;
  std::mt19937_64 rng(404);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const sad::Tensor m = random_matrix(10, 257, seed, 0.0, 1.0);
    const std::size_t bin = 1 + sad::uniform_index(rng, 256);
    const sad::DivisionPoint p(bin, 257);
    const sad::Tensor back = sad::merge(sad::hard_split(m, p));
    exact = exact && back.shape() == m.shape() &&
            std::equal(m.values().begin(), m.values().end(), back.values().begin());
    const sad::SoftSplit s = sad::soft_split(m, p.fraction(), 1e-4);
    for (std::size_t t = 0; t < 10; ++t)
      for (std::size_t b = 0; b < 257; ++b) {
        const double hi = b >= bin ? m.at(t, b) : 0.0;
        worst = std::max(worst, std::abs(s.high.at(t, b) - hi));
        worst = std::max(worst, std::abs(s.low.at(t, b) - (m.at(t, b) - hi)));
      }
  }
  const double t = sw.seconds();
  return {exact && worst < 1e-6 && t < 10.0,
          std::string("merge(hard_split) ") + (exact ? "bit-exact" : "MISMATCH") +
              ", soft vs hard max dev " + fmt("%.2e", worst) + ", " + fmt("%.2f s", t)};
}

std::size_t brute_force_knee(const sad::Tensor& mag) {
  const std::size_t frames = mag.dim(0), bins = mag.dim(1);
  std::vector<double> p(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t t = 0; t < frames; ++t) p[b] += mag.at(t, b);
    p[b] /= static_cast<double>(frames);
  }
  const double mx = *std::max_element(p.begin(), p.end());
  for (double& v : p) v = v > 0 ? std::max(-80.0, 20 * std::log10(v / mx)) : -80.0;
  std::vector<double> s(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double acc = 0;
    int n = 0;
    for (long j = static_cast<long>(b) - 2; j <= static_cast<long>(b) + 2; ++j)
      if (j >= 0 && j < static_cast<long>(bins)) {
        acc += p[static_cast<std::size_t>(j)];
        ++n;
      }
    s[b] = acc / n;
  }
  std::size_t best = 32;
  for (std::size_t b = 32; b <= 192; ++b)
    if (s[b] - s[b - 1] < s[best] - s[best - 1]) best = b;
  return best;
}

sad::Tensor knee_matrix(std::size_t knee, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  sad::Tensor m = sad::make_matrix(20, 257);
  for (std::size_t t = 0; t < 20; ++t)
    for (std::size_t b = 0; b < 257; ++b) {
      const double level_db =
          b < knee ? -0.02 * static_cast<double>(b) : -40.0 - 0.05 * static_cast<double>(b - knee);
      m.at(t, b) = std::pow(10.0, level_db / 20.0) * sad::uniform(rng, 0.9, 1.1);
    }
  return m;
}

Outcome division_oracle() {
  Stopwatch sw;
  long worst = 0;
  bool invariant = true;
  for (std::size_t knee : {64, 96, 128, 160})
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      sad::Tensor m = knee_matrix(knee, seed);
      const std::size_t got = sad::dfkd_division_point(m).point.bin();
      worst = std::max(worst, std::abs(static_cast<long>(got) -
                                       static_cast<long>(brute_force_knee(m))));
      for (double& v : m.values()) v *= 7.3;
      invariant = invariant && sad::dfkd_division_point(m).point.bin() == got;
    }
  const double t = sw.seconds();
  return {worst <= 2 && invariant && t < 10.0,
          "max |oracle - brute force| " + std::to_string(worst) + " bins, scaling " +
              (invariant ? "invariant" : "NOT invariant") + ", " + fmt("%.2f s", t)};
}

Outcome band_locality() {
  Stopwatch sw;
  double worst = 0.0;
  bool moves = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const sad::Tensor clean = random_matrix(20, 257, seed, 0.1, 1.0);
    const sad::Tensor noise = random_matrix(20, 257, seed + 1000, 0.0, 0.5);
    const sad::DivisionPoint m(60 + 7 * seed, 257);
    const sad::MosScores base = sad::score_utterance(clean, clean, m);
    sad::Tensor above = clean, below = clean;
    for (std::size_t t = 0; t < 20; ++t)
      for (std::size_t b = 0; b < 257; ++b)
        (b >= m.bin() ? above : below).at(t, b) += noise.at(t, b);
    const sad::MosScores a = sad::score_utterance(clean, above, m);
    const sad::MosScores l = sad::score_utterance(clean, below, m);
    worst = std::max({worst, std::abs(a.sig - base.sig), std::abs(l.bak - base.bak)});
    moves = moves && a.bak < base.bak && l.sig < base.sig;
  }
  const double t = sw.seconds();
  return {worst < 1e-9 && moves && t < 30.0,
          "max off-band delta " + fmt("%.2e", worst) + ", " + fmt("%.2f s", t)};
}

// ---------------------------------------------------------------- CLI runs

class Cli {
 public:
  Cli(fs::path exe, fs::path work) : exe_(std::move(exe)), work_(std::move(work)) {}

  bool run(const std::string& args, const std::string& log_name) const {
    const std::string cmd = "\"" + exe_.string() + "\" " + args + " > \"" +
                            (work_ / (log_name + ".log")).string() + "\" 2>&1";
    return std::system(cmd.c_str()) == 0;
  }
  const fs::path& work() const { return work_; }

 private:
  fs::path exe_;
  fs::path work_;
};

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

struct DeskScale {
  bool ok = false;
  std::string error;
  fs::path sad_log;
  json sad_report, fb_report;
  double seconds = 0.0;
};

DeskScale run_desk_scale(const Cli& cli) {
  DeskScale d;
  Stopwatch sw;
  const fs::path w = cli.work();
  const fs::path corpus = w / "corpus200";
  const std::string manifest = q(corpus / "manifest.jsonl");
  if (!cli.run("--out " + q(corpus) + " synth --n 200 --duration 6 --snr-lo 0 --snr-hi 20",
               "synth200")) {
    d.error = "synth failed";
    return d;
  }
  if (!cli.run("--out " + q(w / "sad") + " train --manifest " + manifest, "train_sad") ||
      !cli.run("--out " + q(w / "sad_report.json") + " eval --split val --checkpoint " +
                   q(w / "sad" / "final.ckpt") + " --manifest " + manifest,
               "eval_sad")) {
    d.error = "SaD run failed";
    return d;
  }
  if (!cli.run("--set discriminator_mode=fullband --out " + q(w / "fullband") +
                   " train --manifest " + manifest,
               "train_fullband") ||
      !cli.run("--out " + q(w / "fullband_report.json") + " eval --split val --checkpoint " +
                   q(w / "fullband" / "final.ckpt") + " --manifest " + manifest,
               "eval_fullband")) {
    d.error = "full-band run failed";
    return d;
  }
  d.sad_log = w / "sad" / "train_log.ndjson";
  d.sad_report = json::parse(slurp(w / "sad_report.json"));
  d.fb_report = json::parse(slurp(w / "fullband_report.json"));
  d.seconds = sw.seconds();
  d.ok = true;
  return d;
}

Outcome schedule_conformance(const DeskScale& d) {
  if (!d.ok) return {false, d.error};
  std::set<int> sup_steps, unsup_steps, sup_epochs;
  bool loss_m_ok = true, consistent = true;
  int max_epoch = 0;
  for (const json& r : read_ndjson(d.sad_log)) {
    const int e = r.at("epoch");
    max_epoch = std::max(max_epoch, e);
    if (r.at("type") == "epoch") {
      if (r.at("supervised_m").get<bool>()) sup_epochs.insert(e);
      continue;
    }
    const json& mean = r.at("mean");
    const bool sup = mean.at("supervised_m");
    (sup ? sup_steps : unsup_steps).insert(e);
    // Without supervision Loss_D is reconstructed from the score terms alone.
    if (!sup) {
      loss_m_ok = loss_m_ok && mean.at("loss_m").is_null();
      for (const json& u : r.at("utterances")) {
        loss_m_ok = loss_m_ok && u.at("loss_m").is_null();
        const double a = u.at("alpha"), wb = u.at("bak_weight");
        const double manual = wb * u.at("loss_bak").get<double>() +
                              (1 - wb) * u.at("loss_sig").get<double>() +
                              u.at("loss_ovl").get<double>();
        consistent = consistent && std::abs(u.at("loss_d").get<double>() - manual) < 1e-9 &&
                     wb == a;
      }
    }
  }
  std::set<int> want;
  for (int e = 1; e <= 10; ++e) want.insert(e);
  const bool ok = sup_steps == want && sup_epochs == want && max_epoch == 15 &&
                  !unsup_steps.empty() && *unsup_steps.begin() == 11 && loss_m_ok && consistent;
  return {ok, "supervised epochs " + std::to_string(sup_steps.size()) + " (1.." +
                  (sup_steps.empty() ? "-" : std::to_string(*sup_steps.rbegin())) +
                  "), loss_m absent afterwards: " + (loss_m_ok && consistent ? "yes" : "no")};
}

Outcome desk_scale(const DeskScale& d) {
  if (!d.ok) return {false, d.error};
  const json& sa = d.sad_report.at("aggregate");
  const json& fa = d.fb_report.at("aggregate");
  const double identity_median =
      d.sad_report.at("identity_aggregate").at("si_sdr_improvement").at("median");
  const double median = sa.at("si_sdr_improvement").at("median");
  const double bak_sad = sa.at("bak").at("mean");
  const double bak_fb = fa.at("bak").at("mean");
  double worst_err = 0.0;
  int late_epochs = 0;
  for (const json& r : read_ndjson(d.sad_log))
    if (r.at("type") == "epoch" && r.at("epoch").get<int>() > 10) {
      worst_err = std::max(worst_err, r.at("val").at("mean_abs_err_fraction").get<double>());
      ++late_epochs;
    }
  const bool a = identity_median == 0.0 && median > 3.0;
  const bool b = bak_sad >= bak_fb;
  const bool c = late_epochs == 5 && worst_err < 0.1;
  const bool t = d.seconds < 1800.0;
  return {a && b && c && t,
          std::string("(a) median SI-SDR impr ") + fmt("%.3f dB", median) + " (identity " +
              fmt("%.3f", identity_median) + ") " + (a ? "ok" : "FAIL") + "; (b) BAK SaD " +
              fmt("%.4f", bak_sad) + " vs full-band " + fmt("%.4f", bak_fb) + " " +
              (b ? "ok" : "FAIL") + "; (c) max |m_hat-m| after epoch 10 " +
              fmt("%.3f", worst_err) + " " + (c ? "ok" : "FAIL") + "; " +
              fmt("%.0f s", d.seconds)};
}

// Small corpus shared by the determinism and ablation checks.
bool small_corpus(const Cli& cli, fs::path* manifest) {
  const fs::path corpus = cli.work() / "corpus_small";
  *manifest = corpus / "manifest.jsonl";
  if (fs::exists(*manifest)) return true;
  return cli.run("--out " + q(corpus) + " synth --n 30 --duration 2", "synth_small");
}

const char* kSmallRun =
    "--set epochs=4 --set k_supervised=2 --set pretrain_epochs=2 --set pretrain_utterances=8";

Outcome determinism(const Cli& cli) {
  fs::path manifest;
  if (!small_corpus(cli, &manifest)) return {false, "synth failed"};
  const fs::path w = cli.work();
  const std::string base = std::string(kSmallRun) + " --out ";
  const std::string tail = " train --manifest " + q(manifest);
  bool ran = cli.run(base + q(w / "det_a") + tail, "det_a") &&
             cli.run(base + q(w / "det_b") + tail, "det_b") &&
             cli.run(base + q(w / "det_c") + tail + " --stop-after 2", "det_c1") &&
             cli.run(base + q(w / "det_c") + tail + " --resume " +
                         q(w / "det_c" / "checkpoints" / "epoch_002.ckpt"),
                     "det_c2");
  if (!ran) return {false, "a training run failed"};
  const std::string la = slurp(w / "det_a" / "train_log.ndjson");
  const bool logs = !la.empty() && la == slurp(w / "det_b" / "train_log.ndjson");
  const sad::Checkpoint ca = sad::load_checkpoint(w / "det_a" / "final.ckpt");
  const sad::Checkpoint cb = sad::load_checkpoint(w / "det_b" / "final.ckpt");
  const sad::Checkpoint cc = sad::load_checkpoint(w / "det_c" / "final.ckpt");
  const bool same = ca.models.checksum() == cb.models.checksum();
  const bool resumed = ca.models.checksum() == cc.models.checksum() &&
                       la == slurp(w / "det_c" / "train_log.ndjson");
  return {logs && same && resumed,
          std::string("logs ") + (logs ? "byte-identical" : "DIFFER") + ", checksum " +
              sad::to_hex(ca.models.checksum()) + (same ? "" : " (rerun differs)") +
              ", resume " + (resumed ? "matches" : "DIFFERS")};
}

Outcome ablations(const Cli& cli) {
  fs::path manifest;
  if (!small_corpus(cli, &manifest)) return {false, "synth failed"};
  struct Variant {
    const char* name;
    const char* sets;
    const char* label;
  };
  const Variant variants[] = {
      {"abl_no_ws", "--set k_supervised=0", "no_weak_supervision"},
      {"abl_no_pretrain", "--set pretrain=false", "no_disc_pretrain"},
      {"abl_no_snr", "--set alpha_mode=fixed --set fixed_alpha=0.5", "no_snr_weight"},
  };
  std::string detail;
  bool ok = true;
  const fs::path w = cli.work();
  for (const auto& v : variants) {
    const std::string sets = std::string(kSmallRun) + " " + v.sets;
    const fs::path report = w / (std::string(v.name) + ".json");
    const bool ran =
        cli.run(sets + " --out " + q(w / v.name) + " train --manifest " + q(manifest),
                std::string(v.name) + "_train") &&
        cli.run("--out " + q(report) + " eval --split train --checkpoint " +
                    q(w / v.name / "final.ckpt") + " --manifest " + q(manifest),
                std::string(v.name) + "_eval");
    bool good = ran;
    if (ran) {
      const json r = json::parse(slurp(report));
      const auto abl = r.at("ablations").get<std::vector<std::string>>();
      good = std::find(abl.begin(), abl.end(), v.label) != abl.end();
      for (const json& row : r.at("rows"))
        for (const char* k : {"si_sdr_enhanced", "seg_snr_enhanced", "bak_proxy", "sig_proxy",
                              "ovl_proxy"})
          good = good && row.at(k).is_number() && std::isfinite(row.at(k).get<double>());
    }
    ok = ok && good;
    detail += std::string(v.label) + (good ? " ok" : " FAIL") + ", ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli_path, work_dir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli_path, "path to the sad executable")->required();
  app.add_option("--work", work_dir, "scratch directory")->capture_default_str();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::absolute(work_dir);
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work);
  const Cli cli(fs::absolute(cli_path), work);
  const auto wanted = [&](int k) {
    return only.empty() || std::find(only.begin(), only.end(), k) != only.end();
  };

  std::optional<DeskScale> desk;
  const auto desk_run = [&]() -> const DeskScale& {
    if (!desk) desk = run_desk_scale(cli);
    return *desk;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"equation fidelity", equation_fidelity},
      {"alpha endpoints and affinity", alpha_endpoints},
      {"gradient oracle", gradient_oracle},
      {"split algebra", split_algebra},
      {"division-point oracle", division_oracle},
      {"MOS-proxy band locality", band_locality},
      {"schedule conformance", [&] { return schedule_conformance(desk_run()); }},
      {"desk-scale directional experiment", [&] { return desk_scale(desk_run()); }},
      {"determinism and resume", [&] { return determinism(cli); }},
      {"ablation switch coverage", [&] { return ablations(cli); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!wanted(k)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", k, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
