#include "ookgate/drift.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "ookgate/error.hpp"

namespace ookgate {

double ks_statistic(std::span<const double> samples_a, std::span<const double> samples_b) {
  if (samples_a.empty() || samples_b.empty()) {
    throw Error(Errc::EmptySamples, "KS statistic needs two nonempty samples");
  }
  std::vector<double> a(samples_a.begin(), samples_a.end());
  std::vector<double> b(samples_b.begin(), samples_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  // Both step functions are constant on (-inf, min) and between consecutive
  // breakpoints, so the left region plus every breakpoint covers both
  // one-sided limits.
  double sup = std::abs(1.0 / (1.0 + na) - 1.0 / (1.0 + nb));
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double t;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      t = a[i];
    } else {
      t = b[j];
    }
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    const double fa = (1.0 + static_cast<double>(i)) / (1.0 + na);
    const double fb = (1.0 + static_cast<double>(j)) / (1.0 + nb);
    sup = std::max(sup, std::abs(fa - fb));
  }
  return sup;
}

double ks_threshold(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::AlphaOutOfRange, "alpha must lie in (0, 1)");
  if (n == 0 || m == 0) throw Error(Errc::ZeroSampleSize, "sample sizes must be positive");
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return std::sqrt(-std::log(alpha / 2.0) * (dn + dm) / (2.0 * dn * dm));
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j < 1'000'000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_asymptotic(double t_ks, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw Error(Errc::ZeroSampleSize, "sample sizes must be positive");
  if (!(t_ks >= 0.0 && t_ks <= 1.0)) {
    throw Error(Errc::InvalidArgument, "KS statistic must lie in [0, 1]");
  }
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return kolmogorov_survival(t_ks * std::sqrt(dn * dm / (dn + dm)));
}

DriftDecision drift_decision(std::span<const double> reference_stats,
                             std::span<const double> batch_stats, double alpha) {
  DriftDecision d;
  d.alpha = alpha;
  d.n = reference_stats.size();
  d.m = batch_stats.size();
  d.threshold = ks_threshold(alpha, d.n, d.m);
  d.t_ks = ks_statistic(reference_stats, batch_stats);
  d.reject = d.t_ks > d.threshold;
  d.p_asymptotic = ks_p_asymptotic(d.t_ks, d.n, d.m);
  return d;
}

DriftDecision drift_test(const Calibration& cal, std::span<const Embedding> batch,
                         const CorpusIndex& index, double alpha) {
  if (batch.empty()) throw Error(Errc::EmptySamples, "drift batch is empty");
  const auto stats = score_queries(cal, index, batch);
  return drift_decision(cal.sorted_stats, stats, alpha);
}

std::string to_json(const DriftDecision& d) {
  nlohmann::ordered_json j;
  j["t_ks"] = d.t_ks;
  j["threshold"] = d.threshold;
  j["alpha"] = d.alpha;
  j["reject"] = d.reject;
  j["p_asymptotic"] = d.p_asymptotic;
  j["n"] = d.n;
  j["m"] = d.m;
  return j.dump();
}

}  // namespace ookgate
