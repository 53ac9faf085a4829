#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "errors.hpp"
#include "fixtures.hpp"
#include "ookgate/drift.hpp"

namespace ookgate {
namespace {

using testing::code_of;
using V = std::vector<double>;

double smoothed_ecdf(const V& s, double t) {
  double c = 0;
  for (double x : s) c += x <= t ? 1 : 0;
  return (1 + c) / (1 + static_cast<double>(s.size()));
}

// Dense grid over the merged range plus every sample value and a point
// left of both samples.
double ks_oracle(const V& a, const V& b) {
  V probes(a);
  probes.insert(probes.end(), b.begin(), b.end());
  const double lo = *std::min_element(probes.begin(), probes.end());
  const double hi = *std::max_element(probes.begin(), probes.end());
  const std::size_t points = 10 * (a.size() + b.size());
  for (std::size_t i = 0; i <= points; ++i) {
    probes.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points));
  }
  probes.push_back(lo - 1.0);
  double sup = 0;
  for (double t : probes) sup = std::max(sup, std::abs(smoothed_ecdf(a, t) - smoothed_ecdf(b, t)));
  return sup;
}

TEST(KsStatistic, Examples) {
  EXPECT_DOUBLE_EQ(ks_statistic(V{0.3, 0.1, 0.2}, V{0.2, 0.3, 0.1}), 0.0);
  EXPECT_DOUBLE_EQ(ks_statistic(V{0, 0, 0}, V{1, 1, 1}), 0.75);
  EXPECT_NEAR(ks_statistic(V{1, 2}, V{1.5, 2.5}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(code_of([] { ks_statistic(V{}, V{1}); }), Errc::EmptySamples);
}

TEST(KsStatistic, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_int_distribution<int> grid(-30, 30);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    V a(size(rng)), b(size(rng));
    const bool ties = trial % 2 == 0;
    for (auto& x : a) x = ties ? grid(rng) / 10.0 : n(rng);
    for (auto& x : b) x = ties ? grid(rng) / 10.0 : n(rng) + 0.3;
    const double t = ks_statistic(a, b);
    EXPECT_NEAR(t, ks_oracle(a, b), 1e-12);
    EXPECT_EQ(t, ks_statistic(b, a));
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(KsStatistic, DisjointEqualSizes) {
  for (std::size_t n : {1u, 5u, 50u}) {
    V a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(i);
      b[i] = 1000.0 + static_cast<double>(i);
    }
    EXPECT_DOUBLE_EQ(ks_statistic(a, b), static_cast<double>(n) / (1.0 + static_cast<double>(n)));
  }
}

TEST(KsThreshold, ClosedForm) {
  EXPECT_NEAR(ks_threshold(0.05, 50, 50), std::sqrt(-std::log(0.025) * 100.0 / 5000.0), 1e-15);
  EXPECT_NEAR(ks_threshold(0.05, 50, 50), 0.271620, 1e-6);
  EXPECT_NEAR(ks_threshold(0.05, 100, 100), std::sqrt(-std::log(0.025) * 200.0 / 20000.0), 1e-15);
  EXPECT_NEAR(ks_threshold(0.05, 100, 100), 0.19206, 1e-5);
  EXPECT_LT(ks_threshold(0.05, 1'000'000'000, 1'000'000'000), 1e-4);
  EXPECT_EQ(code_of([] { ks_threshold(0.0, 5, 5); }), Errc::AlphaOutOfRange);
  EXPECT_EQ(code_of([] { ks_threshold(0.05, 0, 5); }), Errc::ZeroSampleSize);
}

TEST(KsPValue, Series) {
  EXPECT_DOUBLE_EQ(ks_p_asymptotic(0.0, 10, 10), 1.0);
  double q1 = 0;
  for (int j = 1; j <= 6; ++j) q1 += 2 * (j % 2 ? 1 : -1) * std::exp(-2.0 * j * j);
  EXPECT_NEAR(kolmogorov_survival(1.0), q1, 1e-12);
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.2700, 5e-4);
  // lambda = 1 reached through t·sqrt(nm/(n+m)) with n = m = 50
  EXPECT_NEAR(ks_p_asymptotic(0.2, 50, 50), q1, 1e-12);
  EXPECT_LT(ks_p_asymptotic(1.0, 1000, 1000), 1e-12);
  EXPECT_NEAR(kolmogorov_survival(0.01), 1.0, 1e-9);
  double prev = 1.0;
  for (double l = 0.05; l < 3; l += 0.05) {
    const double q = kolmogorov_survival(l);
    EXPECT_LE(q, prev + 1e-9);
    EXPECT_GE(q, 0.0);
    prev = q;
  }
}

TEST(DriftDecision, RuleAndSerialisation) {
  V ref(50), batch(50);
  for (int i = 0; i < 50; ++i) {
    ref[i] = i;
    batch[i] = i < 15 ? 100 + i : i;  // t_ks = 15/51 ≈ 0.294 > 0.2716
  }
  const auto d = drift_decision(ref, batch, 0.05);
  EXPECT_NEAR(d.t_ks, 15.0 / 51.0, 1e-15);
  EXPECT_TRUE(d.reject);
  EXPECT_EQ(d.n, 50u);
  EXPECT_EQ(d.m, 50u);
  const auto j = nlohmann::json::parse(to_json(d));
  EXPECT_EQ(j["reject"], true);
  EXPECT_EQ(j["t_ks"].get<double>(), d.t_ks);
  EXPECT_EQ(j.size(), 7u);
}

TEST(DriftTest, SameAndOrthogonalBatches) {
  std::mt19937_64 rng(42);
  testing::ClusterGeometry g{32};
  const auto index = testing::make_index(testing::cluster(g.center_a(), 1.0, 300, rng));
  const auto queries = testing::cluster(g.center_a(), 1.0, 200, rng);
  const auto cal = build_calibration(index, queries, {Statistic::Energy, 16}, Provenance::TrueInKnowledge);

  std::vector<Embedding> resampled(queries.begin(), queries.begin() + 50);
  EXPECT_FALSE(drift_test(cal, resampled, index, 0.05).reject);

  const auto far = testing::cluster(g.center_b(4.0), 1.0, 50, rng);
  const auto d = drift_test(cal, far, index, 0.05);
  EXPECT_TRUE(d.reject);
  EXPECT_GT(d.t_ks, 0.9);
  EXPECT_EQ(code_of([&] { drift_test(cal, std::vector<Embedding>{}, index, 0.05); }),
            Errc::EmptySamples);
}

}  // namespace
}  // namespace ookgate
