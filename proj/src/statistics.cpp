#include "ookgate/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "ookgate/error.hpp"

namespace ookgate {

namespace {

std::span<const double> top(std::span<const double> sims, std::size_t k) {
  if (sims.empty()) throw Error(Errc::EmptyNeighborList, "no neighbours to score");
  return sims.first(std::min(k == 0 ? sims.size() : k, sims.size()));
}

}  // namespace

std::string_view to_string(Statistic kind) {
  switch (kind) {
    case Statistic::Mss: return "mss";
    case Statistic::Knn: return "knn";
    case Statistic::AvgKnn: return "avgknn";
    case Statistic::Entropy: return "entropy";
    case Statistic::Energy: return "energy";
    case Statistic::Fisher: return "fisher";
    case Statistic::Simes: return "simes";
  }
  return "?";
}

Statistic parse_statistic(std::string_view token) {
  for (auto kind : {Statistic::Mss, Statistic::Knn, Statistic::AvgKnn, Statistic::Entropy,
                    Statistic::Energy, Statistic::Fisher, Statistic::Simes}) {
    if (token == to_string(kind)) return kind;
  }
  throw Error(Errc::InvalidArgument, "unknown statistic '" + std::string(token) + "'");
}

void StatisticSpec::validate() const {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
  if (rank_j > k) {
    throw Error(Errc::InvalidArgument,
                "rank_j " + std::to_string(rank_j) + " exceeds k " + std::to_string(k));
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(Errc::InvalidTemperature, "tau must be a positive finite number");
  }
}

double score_mss(std::span<const double> sims) { return -top(sims, 1).front(); }

double score_knn_rank(std::span<const double> sims, std::size_t j) {
  if (j == 0 || j > sims.size()) {
    throw Error(Errc::RankOutOfRange, "rank " + std::to_string(j) + " with " +
                                          std::to_string(sims.size()) + " neighbours");
  }
  return -sims[j - 1];
}

double score_avg_knn(std::span<const double> sims, std::size_t k) {
  const auto s = top(sims, k);
  double sum = 0.0;
  for (double x : s) sum += x;
  return -sum / static_cast<double>(s.size());
}

double score_entropy(std::span<const double> sims, std::size_t k) {
  const auto s = top(sims, k);
  const double mx = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double x : s) z += std::exp(x - mx);
  const double log_z = std::log(z);
  // H = −Σ p log p with log p_i = (s_i − max) − log Z.
  double h = 0.0;
  for (double x : s) {
    const double log_p = (x - mx) - log_z;
    h -= std::exp(log_p) * log_p;
  }
  return std::max(h, 0.0);
}

double score_energy(std::span<const double> sims, std::size_t k, double tau) {
  if (!(tau > 0.0)) throw Error(Errc::InvalidTemperature, "tau must be positive");
  const auto s = top(sims, k);
  const double mx = *std::max_element(s.begin(), s.end());
  double acc = 0.0;
  for (double x : s) acc += std::exp((x - mx) / tau);
  return -(mx + tau * std::log(acc));
}

double compute_score(const StatisticSpec& spec, std::span<const double> sims) {
  switch (spec.kind) {
    case Statistic::Mss: return score_mss(sims);
    case Statistic::Knn: return score_knn_rank(sims, spec.effective_rank());
    case Statistic::AvgKnn: return score_avg_knn(sims, spec.k);
    case Statistic::Entropy: return score_entropy(sims, spec.k);
    case Statistic::Energy: return score_energy(sims, spec.k, spec.tau);
    case Statistic::Fisher:
    case Statistic::Simes:
      break;
  }
  throw Error(Errc::MetaKindRequiresCalibration,
              std::string(to_string(spec.kind)) + " needs per-rank null pools");
}

}  // namespace ookgate
