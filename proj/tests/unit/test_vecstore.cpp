#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "errors.hpp"
#include "fixtures.hpp"
#include "ookgate/vecstore.hpp"

namespace ookgate {
namespace {

using testing::code_of;

TEST(Similarity, Examples) {
  const Embedding x{1, 0}, y{0, 1}, a{1, 2}, b{3, 4};
  EXPECT_DOUBLE_EQ(similarity(x, x, Metric::Cosine), 1.0);
  EXPECT_DOUBLE_EQ(similarity(x, y, Metric::Cosine), 0.0);
  EXPECT_DOUBLE_EQ(similarity(a, b, Metric::DotProduct), 11.0);
}

TEST(Similarity, Errors) {
  const Embedding x{1, 0}, z{0, 0}, three{1, 2, 3};
  const Embedding nan{std::numeric_limits<float>::quiet_NaN(), 1};
  EXPECT_EQ(code_of([&] { similarity(x, three, Metric::Cosine); }), Errc::DimensionMismatch);
  EXPECT_EQ(code_of([&] { similarity(x, z, Metric::Cosine); }), Errc::ZeroVector);
  EXPECT_EQ(code_of([&] { similarity(x, nan, Metric::DotProduct); }), Errc::NonFinite);
  EXPECT_DOUBLE_EQ(similarity(x, z, Metric::DotProduct), 0.0);
}

TEST(Similarity, SymmetryAndScaleInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Embedding a(16), b(16), ca(16);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const float c = 0.1f + static_cast<float>(trial) * 0.37f;
    for (std::size_t i = 0; i < 16; ++i) ca[i] = c * a[i];
    for (auto m : {Metric::Cosine, Metric::DotProduct}) {
      EXPECT_EQ(similarity(a, b, m), similarity(b, a, m));
    }
    EXPECT_NEAR(similarity(ca, b, Metric::Cosine), similarity(a, b, Metric::Cosine), 1e-6);
    const double s = similarity(a, b, Metric::Cosine);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(s, -1.0);
  }
}

TEST(BuildIndex, ConstructionAndErrors) {
  const std::vector<Embedding> rows{{1, 0}, {0, 1}, {0.6f, 0.8f}};
  const auto index = CorpusIndex::build(rows, {"d1", "d2", "d3"}, Metric::Cosine);
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.dim(), 2u);
  EXPECT_EQ(index.doc_id(2), "d3");

  EXPECT_EQ(code_of([] { CorpusIndex::build({{1, 0}, {0, 1}}, {"d1", "d1"}, Metric::Cosine); }),
            Errc::DuplicateId);
  EXPECT_EQ(code_of([] { CorpusIndex::build({}, {}, Metric::Cosine); }), Errc::EmptyCorpus);
  EXPECT_EQ(code_of([] { CorpusIndex::build({{1, 0}, {0, 1, 2}}, {"a", "b"}, Metric::Cosine); }),
            Errc::DimensionMismatch);
  EXPECT_EQ(code_of([] { CorpusIndex::build({{1, 0}, {0, 0}}, {"a", "b"}, Metric::Cosine); }),
            Errc::ZeroVector);
}

TEST(KnnSearch, Examples) {
  const auto index = CorpusIndex::build({{1, 0}, {0, 1}, {0.6f, 0.8f}}, {"d1", "d2", "d3"},
                                        Metric::Cosine);
  const Embedding q{1, 0};
  const auto nb = knn_search(index, q, 2);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb.entries[0].doc_id, "d1");
  EXPECT_DOUBLE_EQ(nb.entries[0].similarity, 1.0);
  EXPECT_EQ(nb.entries[1].doc_id, "d3");
  EXPECT_NEAR(nb.entries[1].similarity, 0.6, 1e-7);
  EXPECT_EQ(nb.k_requested, 2u);

  EXPECT_EQ(knn_search(index, q, 10).size(), 3u);
  EXPECT_EQ(code_of([&] { knn_search(index, q, 0); }), Errc::InvalidArgument);
  const Embedding q3{1, 0, 0};
  EXPECT_EQ(code_of([&] { knn_search(index, q3, 1); }), Errc::DimensionMismatch);
}

TEST(KnnSearch, TiesBrokenByAscendingId) {
  const auto index = CorpusIndex::build({{0.5f, 1}, {0.5f, 2}}, {"dB", "dA"}, Metric::DotProduct);
  const Embedding q{1, 0};
  const auto nb = knn_search(index, q, 2);
  EXPECT_EQ(nb.entries[0].doc_id, "dA");
  EXPECT_EQ(nb.entries[1].doc_id, "dB");
}

TEST(KnnSearch, MatchesFullSortOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0, 1);
  std::uniform_int_distribution<std::size_t> size(1, 1000);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t count = size(rng);
    const std::size_t dim = 8;
    std::vector<Embedding> rows(count, Embedding(dim));
    for (auto& r : rows) {
      for (auto& v : r) v = std::round(n(rng) * 2) / 2;  // coarse grid forces ties
      r[0] += 5.0f;
    }
    const auto metric = trial % 2 ? Metric::Cosine : Metric::DotProduct;
    const auto index = testing::make_index(rows, metric);
    Embedding q(dim);
    for (auto& v : q) v = n(rng);
    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < count; ++i) {
      all.emplace_back(similarity(q, rows[i], metric), index.doc_id(i));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const std::size_t k = 1 + trial * 7 % 50;
    const auto nb = knn_search(index, q, k);
    ASSERT_EQ(nb.size(), std::min(k, count));
    for (std::size_t i = 0; i < nb.size(); ++i) {
      EXPECT_EQ(nb.entries[i].doc_id, all[i].second);
      EXPECT_EQ(nb.entries[i].similarity, all[i].first);
    }
    EXPECT_EQ(nb, knn_search(index, q, k));
  }
}

TEST(CorpusIndex, FingerprintTracksContent) {
  const std::vector<Embedding> rows{{1, 0}, {0, 1}};
  const auto a = CorpusIndex::build(rows, {"a", "b"}, Metric::Cosine);
  const auto b = CorpusIndex::build(rows, {"a", "b"}, Metric::Cosine);
  const auto c = CorpusIndex::build(rows, {"a", "c"}, Metric::Cosine);
  const auto d = CorpusIndex::build(rows, {"a", "b"}, Metric::DotProduct);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
  EXPECT_NE(a.fingerprint(), d.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 64u);
}

TEST(Metric, Tokens) {
  EXPECT_EQ(to_string(Metric::Cosine), "cosine");
  EXPECT_EQ(parse_metric("dot"), Metric::DotProduct);
  EXPECT_EQ(code_of([] { parse_metric("l2"); }), Errc::InvalidArgument);
}

}  // namespace
}  // namespace ookgate
