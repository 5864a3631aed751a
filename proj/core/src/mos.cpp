// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/mos.hpp"

#include <algorithm>
#include <cmath>

#include "sad/error.hpp"

namespace sad {

namespace {

void check_shapes(const Tensor& a, const Tensor& b, const char* who) {
  if (a.shape() != b.shape()) throw InvalidInput(std::string(who) + ": shape mismatch");
  if (a.empty()) throw InvalidInput(std::string(who) + ": empty band");
}

double to_mos(double x) { return std::clamp(1.0 + 4.0 * logistic(x), 1.0, 5.0); }

}  // namespace

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bak_proxy(const Tensor& ref, const Tensor& sig, const MosCalibration& cal) {
  check_shapes(ref, sig, "bak_proxy");
  double pr = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    pr += ref[i] * ref[i];
    const double d = sig[i] - ref[i];
    pe += d * d;
  }
  const double r = 10.0 * std::log10((pr + cal.bak_eps) / (pe + cal.bak_eps));
  return to_mos((r - cal.bak_center_db) / cal.bak_scale_db);
}

double sig_proxy(const Tensor& ref, const Tensor& sig, const MosCalibration& cal) {
  check_shapes(ref, sig, "sig_proxy");
  double d = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    d += std::abs(std::log10(sig[i] + cal.sig_eps) - std::log10(ref[i] + cal.sig_eps));
  d /= static_cast<double>(ref.size());
  return to_mos((cal.sig_center - d) / cal.sig_scale);
}

double ovl_proxy(const Tensor& ref, const Tensor& sig, const MosCalibration& cal) {
  const double w = cal.ovl_bak_weight;
  return std::clamp(w * bak_proxy(ref, sig, cal) + (1.0 - w) * sig_proxy(ref, sig, cal), 1.0,
                    5.0);
}

MosScores score_utterance(const Tensor& clean, const Tensor& degraded, const DivisionPoint& m,
                          const MosCalibration& cal) {
  check_shapes(clean, degraded, "score_utterance");
  const BandPair c = hard_split(clean, m);
  const BandPair d = hard_split(degraded, m);
  return {bak_proxy(c.high, d.high, cal), sig_proxy(c.low, d.low, cal),
          ovl_proxy(clean, degraded, cal)};
}

}  // namespace sad
