#pragma once

// Offline two-sample Kolmogorov–Smirnov test for query-distribution drift.
// Both eCDFs use the same +1 smoothing as the online gate.

#include <cstddef>
#include <span>
#include <string>

#include "ookgate/calibration.hpp"

namespace ookgate {

struct DriftDecision {
  double t_ks = 0.0;
  double threshold = 0.0;
  double alpha = 0.05;
  bool reject = false;
  double p_asymptotic = 1.0;
  std::size_t n = 0;  // calibration sample size
  std::size_t m = 0;  // batch size
};

// sup_t |F_a(t) − F_b(t)|; inputs need not be sorted. Throws EmptySamples.
double ks_statistic(std::span<const double> samples_a, std::span<const double> samples_b);

// sqrt(−ln(alpha/2) · (n + m) / (2 n m)).
double ks_threshold(double alpha, std::size_t n, std::size_t m);

// Kolmogorov survival function Q(λ) at λ = t·sqrt(nm/(n+m)).
double ks_p_asymptotic(double t_ks, std::size_t n, std::size_t m);
double kolmogorov_survival(double lambda);

DriftDecision drift_decision(std::span<const double> reference_stats,
                             std::span<const double> batch_stats, double alpha);

DriftDecision drift_test(const Calibration& cal, std::span<const Embedding> batch,
                         const CorpusIndex& index, double alpha);

std::string to_json(const DriftDecision& d);

}  // namespace ookgate
