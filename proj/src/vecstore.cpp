#include "ookgate/vecstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "ookgate/error.hpp"
#include "ookgate/hashing.hpp"

namespace ookgate {

static_assert(std::endian::native == std::endian::little,
              "fingerprints and embedding files assume a little-endian host");

namespace {

void require_finite(std::span<const float> v, std::string_view what) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(Errc::NonFinite, std::string(what) + " has a non-finite entry");
  }
}

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

double l2_norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::Cosine ? "cosine" : "dot";
}

Metric parse_metric(std::string_view token) {
  if (token == "cosine") return Metric::Cosine;
  if (token == "dot" || token == "dot_product") return Metric::DotProduct;
  throw Error(Errc::InvalidArgument, "unknown metric '" + std::string(token) + "'");
}

double similarity(std::span<const float> a, std::span<const float> b, Metric metric) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch,
                "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  require_finite(a, "vector");
  require_finite(b, "vector");
  const double ab = dot(a, b);
  if (metric == Metric::DotProduct) return ab;
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine similarity of a zero vector");
  return ab / (na * nb);
}

std::vector<double> NeighborList::similarities() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.similarity);
  return out;
}

CorpusIndex CorpusIndex::build(const std::vector<Embedding>& vectors,
                               std::vector<std::string> doc_ids, Metric metric,
                               std::vector<std::string> texts) {
  if (vectors.empty()) throw Error(Errc::EmptyCorpus, "no vectors supplied");
  if (doc_ids.size() != vectors.size()) {
    throw Error(Errc::DimensionMismatch, std::to_string(vectors.size()) + " vectors but " +
                                             std::to_string(doc_ids.size()) + " ids");
  }
  if (!texts.empty() && texts.size() != vectors.size()) {
    throw Error(Errc::DimensionMismatch, "text count does not match vector count");
  }
  const std::size_t dim = vectors.front().size();
  if (dim == 0) throw Error(Errc::DimensionMismatch, "zero-dimensional embeddings");

  std::unordered_set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (!seen.insert(id).second) throw Error(Errc::DuplicateId, "duplicate doc id '" + id + "'");
  }

  CorpusIndex index;
  index.dim_ = dim;
  index.metric_ = metric;
  index.rows_.reserve(vectors.size() * dim);
  index.norms_.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    if (v.size() != dim) {
      throw Error(Errc::DimensionMismatch, "row '" + doc_ids[i] + "' has dimension " +
                                               std::to_string(v.size()) + ", expected " +
                                               std::to_string(dim));
    }
    require_finite(v, "row '" + doc_ids[i] + "'");
    const double norm = l2_norm(v);
    if (metric == Metric::Cosine && norm == 0.0) {
      throw Error(Errc::ZeroVector, "row '" + doc_ids[i] + "' is the zero vector");
    }
    index.norms_.push_back(norm);
    index.rows_.insert(index.rows_.end(), v.begin(), v.end());
  }
  index.doc_ids_ = std::move(doc_ids);
  index.texts_ = std::move(texts);

  Sha256 h;
  h.update_u32(static_cast<std::uint32_t>(dim));
  h.update(to_string(metric));
  for (const auto& id : index.doc_ids_) {
    h.update(id);
    h.update(std::string_view("\0", 1));
  }
  h.update(std::as_bytes(std::span<const float>(index.rows_)));
  index.fingerprint_ = h.hex_digest();
  return index;
}

std::optional<std::string_view> CorpusIndex::text(std::size_t i) const {
  if (texts_.empty()) return std::nullopt;
  return texts_[i];
}

std::vector<double> CorpusIndex::similarities_to(std::span<const float> query) const {
  if (query.size() != dim_) {
    throw Error(Errc::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                             " vs index dimension " + std::to_string(dim_));
  }
  require_finite(query, "query");
  const std::size_t n = size();
  std::vector<double> sims(n);
  if (metric_ == Metric::DotProduct) {
    for (std::size_t i = 0; i < n; ++i) sims[i] = dot(query, row(i));
    return sims;
  }
  const double qn = l2_norm(query);
  if (qn == 0.0) throw Error(Errc::ZeroVector, "query is the zero vector");
  // Same operation order as similarity(), so both routes agree bit-for-bit.
  for (std::size_t i = 0; i < n; ++i) sims[i] = dot(query, row(i)) / (qn * norms_[i]);
  return sims;
}

NeighborList CorpusIndex::search(std::span<const float> query, std::size_t k) const {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
  const std::vector<double> sims = similarities_to(query);

  std::vector<std::size_t> order(sims.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return doc_ids_[a] < doc_ids_[b];
                    });

  NeighborList out;
  out.k_requested = k;
  out.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.entries.push_back({doc_ids_[order[i]], sims[order[i]]});
  return out;
}

}  // namespace ookgate
