#pragma once

// Empirical null model for the online goodness-of-fit gate.
//
// The null distribution of a statistic is estimated from in-knowledge (or
// synthetic) calibration queries with the +1-smoothed eCDF
//
//     F(t) = (1 + #{t_i <= t}) / (1 + n),
//
// a query's p-value is 1 − F(t), and it is rejected as out-of-knowledge when
// p <= alpha. Per-rank pools of −s_i additionally support Fisher and Simes
// combination of k per-neighbour tests.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ookgate/statistics.hpp"
#include "ookgate/vecstore.hpp"

namespace ookgate {

enum class Provenance { TrueInKnowledge, Synthetic };

std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view token);

// How Fisher combines per-rank p-values. Literal is −2 Σ p_i;
// LogTransform is the classical −2 Σ ln max(p_i, 1/(1+n_cal)).
enum class FisherMode { Literal, LogTransform };

std::string_view to_string(FisherMode mode);
FisherMode parse_fisher_mode(std::string_view token);

struct Calibration {
  StatisticSpec stat;  // k and rank_j hold the effective (possibly truncated) values
  FisherMode fisher_mode = FisherMode::Literal;
  Metric metric = Metric::Cosine;
  std::size_t dim = 0;
  std::vector<double> sorted_stats;             // ascending, one per calibration query
  std::vector<std::vector<double>> rank_pools;  // k pools of −s_i, each ascending
  Provenance provenance = Provenance::TrueInKnowledge;
  std::string corpus_fingerprint;

  std::size_t n_cal() const { return sorted_stats.size(); }

  // Throws InvariantViolation describing the first broken invariant.
  void validate() const;

  bool operator==(const Calibration&) const = default;
};

struct GateDecision {
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  StatisticSpec stat;
  bool fingerprint_match = true;
};

// (1 + #{samples <= t}) / (1 + n). Throws EmptySamples.
double ecdf_eval(std::span<const double> sorted_samples, double t);

double p_value(std::span<const double> sorted_samples, double t);
double p_value(const Calibration& cal, double t);

// inf{t : F(t) > 1 − alpha}, which is always one of the samples.
// Throws AlphaOutOfRange unless 0 < alpha < 1.
double critical_value(std::span<const double> sorted_samples, double alpha);
double critical_value(const Calibration& cal, double alpha);

// Throws InvalidArgument / PValueOutOfRange for empty input or p outside [0,1].
double fisher_combine(std::span<const double> p_values,
                      FisherMode mode = FisherMode::Literal, double floor = 0.0);
double simes_combine(std::span<const double> p_values);

// p_i = 1 − F_i(−s_i) against rank pool i, for i = 1..k.
// Throws NeighborListTooShort.
std::vector<double> per_rank_p_values(const Calibration& cal, std::span<const double> sims);
std::vector<double> per_rank_p_values(const Calibration& cal, const NeighborList& nb);

// Throws EmptyCalibrationSet, DimensionMismatch, and statistic validation errors.
Calibration build_calibration(const CorpusIndex& index, std::span<const Embedding> queries,
                              StatisticSpec stat, Provenance provenance,
                              FisherMode fisher_mode = FisherMode::Literal);

// The calibrated statistic of a query, oriented larger => out-of-knowledge.
// Simes reports the negated combined p-value.
double score_query(const Calibration& cal, const CorpusIndex& index, std::span<const float> query);
std::vector<double> score_queries(const Calibration& cal, const CorpusIndex& index,
                                  std::span<const Embedding> queries);

GateDecision gate_query(const Calibration& cal, const CorpusIndex& index,
                        std::span<const float> query, double alpha);

inline constexpr std::string_view kCalibrationVersion = "1";

// JSON with reals written in shortest round-trip form (bit-exact reload).
void save_calibration(const Calibration& cal, const std::filesystem::path& path);
std::string calibration_to_json(const Calibration& cal);

// Throws IoError, ParseError, UnsupportedVersion, InvariantViolation,
// ChecksumFailure.
Calibration load_calibration(const std::filesystem::path& path);
Calibration calibration_from_json(std::string_view text);

}  // namespace ookgate
