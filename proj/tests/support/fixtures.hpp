#pragma once

// Synthetic embedding clusters shared by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "ookgate/vecstore.hpp"

namespace ookgate::testing {

// centre + Gaussian noise whose expected length is `rms`
// (per-coordinate sigma = rms / sqrt(dim)).
inline std::vector<Embedding> cluster(const std::vector<double>& center, double rms, std::size_t n,
                                      std::mt19937_64& rng) {
  const std::size_t dim = center.size();
  std::normal_distribution<double> normal(0.0, rms / std::sqrt(static_cast<double>(dim)));
  std::vector<Embedding> out(n, Embedding(dim));
  for (auto& v : out) {
    for (std::size_t i = 0; i < dim; ++i) v[i] = static_cast<float>(center[i] + normal(rng));
  }
  return out;
}

inline std::vector<double> axis(std::size_t dim, std::size_t i, double scale) {
  std::vector<double> v(dim, 0.0);
  v[i] = scale;
  return v;
}

inline std::vector<double> plus(std::vector<double> a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline std::vector<std::string> numbered_ids(std::size_t n, const std::string& prefix = "d") {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline CorpusIndex make_index(const std::vector<Embedding>& rows, Metric metric = Metric::Cosine) {
  return CorpusIndex::build(rows, numbered_ids(rows.size()), metric);
}

// Cluster A at 0.75·e0, the OoK cluster displaced along e1 by
// `separation` times the within-cluster spread (spread 1.0).
struct ClusterGeometry {
  std::size_t dim = 64;
  double center_norm = 0.75;
  double spread = 1.0;

  std::vector<double> center_a() const { return axis(dim, 0, center_norm); }
  std::vector<double> center_b(double separation) const {
    return plus(center_a(), axis(dim, 1, separation * spread));
  }
};

}  // namespace ookgate::testing
