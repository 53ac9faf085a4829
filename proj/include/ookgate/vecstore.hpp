#pragma once

// Flat, exact k-nearest-neighbour search over corpus-chunk embeddings.
//
// Rows are stored as 32-bit floats (the on-disk width) but every similarity
// is accumulated in double. Search is a full scan; results are ordered by
// descending similarity with ties broken by ascending doc id, so identical
// inputs always produce identical neighbour lists.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ookgate {

using Embedding = std::vector<float>;

enum class Metric { Cosine, DotProduct };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view token);

// Cosine: <a,b> / (|a| |b|). DotProduct: <a,b>.
// Throws DimensionMismatch, NonFinite, or ZeroVector (cosine only).
double similarity(std::span<const float> a, std::span<const float> b, Metric metric);

struct Neighbor {
  std::string doc_id;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct NeighborList {
  std::vector<Neighbor> entries;  // non-increasing similarity
  std::size_t k_requested = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<double> similarities() const;

  bool operator==(const NeighborList&) const = default;
};

class CorpusIndex {
 public:
  // Throws EmptyCorpus, DuplicateId, DimensionMismatch (ragged rows or
  // mismatched id/text counts), NonFinite, ZeroVector (cosine only).
  static CorpusIndex build(const std::vector<Embedding>& vectors, std::vector<std::string> doc_ids,
                           Metric metric, std::vector<std::string> texts = {});

  std::size_t size() const { return doc_ids_.size(); }
  std::size_t dim() const { return dim_; }
  Metric metric() const { return metric_; }

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(rows_).subspan(i * dim_, dim_);
  }
  const std::string& doc_id(std::size_t i) const { return doc_ids_[i]; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::optional<std::string_view> text(std::size_t i) const;

  // SHA-256 over (dim, metric, doc ids, row bytes), lowercase hex.
  const std::string& fingerprint() const { return fingerprint_; }

  // Similarity of `query` against every row, in row order.
  std::vector<double> similarities_to(std::span<const float> query) const;

  // The min(k, n) most similar rows. Throws DimensionMismatch, NonFinite,
  // ZeroVector (cosine), or InvalidArgument for k == 0.
  NeighborList search(std::span<const float> query, std::size_t k) const;

 private:
  CorpusIndex() = default;

  std::size_t dim_ = 0;
  Metric metric_ = Metric::Cosine;
  std::vector<float> rows_;
  std::vector<double> norms_;
  std::vector<std::string> doc_ids_;
  std::vector<std::string> texts_;
  std::string fingerprint_;
};

inline NeighborList knn_search(const CorpusIndex& index, std::span<const float> query,
                               std::size_t k) {
  return index.search(query, k);
}

}  // namespace ookgate
