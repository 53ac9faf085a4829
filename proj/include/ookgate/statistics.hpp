#pragma once

// Test statistics over a query's retrieved neighbours. Every statistic is
// oriented so that a larger value is stronger evidence that the query lies
// outside the corpus. Inputs are similarities sorted in descending order;
// when fewer than k are available the statistics use all of them.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "ookgate/vecstore.hpp"

namespace ookgate {

enum class Statistic { Mss, Knn, AvgKnn, Entropy, Energy, Fisher, Simes };

std::string_view to_string(Statistic kind);
Statistic parse_statistic(std::string_view token);

inline bool is_meta(Statistic kind) { return kind == Statistic::Fisher || kind == Statistic::Simes; }

struct StatisticSpec {
  Statistic kind = Statistic::Energy;
  std::size_t k = 32;       // retrieval depth
  std::size_t rank_j = 0;   // KNN rank; 0 means "use k"
  double tau = 1.0;         // Energy temperature

  std::size_t effective_rank() const { return rank_j == 0 ? k : rank_j; }

  // Throws InvalidArgument (k == 0, rank_j > k) or InvalidTemperature.
  void validate() const;

  bool operator==(const StatisticSpec&) const = default;
};

// −s_1
double score_mss(std::span<const double> sims);
// −s_j; throws RankOutOfRange when fewer than j similarities are present.
double score_knn_rank(std::span<const double> sims, std::size_t j);
// −mean(s_1..s_k')
double score_avg_knn(std::span<const double> sims, std::size_t k);
// Shannon entropy (nats) of softmax(s_1..s_k').
double score_entropy(std::span<const double> sims, std::size_t k);
// −tau · log Σ exp(s_i / tau)
double score_energy(std::span<const double> sims, std::size_t k, double tau);

// Dispatch for the univariate kinds. Fisher and Simes need null pools and
// throw MetaKindRequiresCalibration here.
double compute_score(const StatisticSpec& spec, std::span<const double> sims);

inline double compute_score(const StatisticSpec& spec, const NeighborList& nb) {
  const auto sims = nb.similarities();
  return compute_score(spec, sims);
}

}  // namespace ookgate
