#include "ookgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ookgate/error.hpp"

namespace ookgate {

namespace {

void require_classes(const LabeledScores& s) {
  if (s.ook.empty() || s.ik.empty()) {
    throw Error(Errc::EmptyClass, "both OoK and IK scores are required");
  }
}

struct Labeled {
  double score;
  bool positive;
};

// Descending by score; positives before negatives is irrelevant because tie
// blocks are always consumed whole.
std::vector<Labeled> merged_descending(const LabeledScores& s) {
  std::vector<Labeled> all;
  all.reserve(s.ook.size() + s.ik.size());
  for (double x : s.ook) all.push_back({x, true});
  for (double x : s.ik) all.push_back({x, false});
  std::sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) { return a.score > b.score; });
  return all;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double auroc(const LabeledScores& scores) {
  require_classes(scores);
  auto all = merged_descending(scores);
  std::reverse(all.begin(), all.end());  // ascending for ranks
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].positive) rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(scores.ook.size());
  const double nn = static_cast<double>(scores.ik.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auprc(const LabeledScores& scores) {
  require_classes(scores);
  const auto all = merged_descending(scores);
  double tp = 0.0;
  double fp = 0.0;
  double ap = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    double block_pos = 0.0;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].positive ? block_pos : fp) += 1.0;
      ++j;
    }
    tp += block_pos;
    if (block_pos > 0.0) ap += block_pos * tp / (tp + fp);
    i = j;
  }
  return ap / static_cast<double>(scores.ook.size());
}

TprAtFpr tpr_at_fpr(const LabeledScores& scores, double fpr) {
  require_classes(scores);
  std::vector<double> null(scores.ik);
  std::sort(null.begin(), null.end());
  TprAtFpr out;
  out.threshold = critical_value(null, fpr);
  std::size_t hits = 0;
  for (double s : scores.ook) hits += p_value(null, s) <= fpr;
  std::size_t false_alarms = 0;
  for (double s : scores.ik) false_alarms += p_value(null, s) <= fpr;
  out.tpr = static_cast<double>(hits) / static_cast<double>(scores.ook.size());
  out.fpr_realized = static_cast<double>(false_alarms) / static_cast<double>(scores.ik.size());
  return out;
}

double detection_error_rate(const LabeledScores& scores, double fpr) {
  require_classes(scores);
  std::vector<double> null(scores.ik);
  std::sort(null.begin(), null.end());
  std::size_t errors = 0;
  for (double s : scores.ik) errors += p_value(null, s) <= fpr;
  for (double s : scores.ook) errors += p_value(null, s) > fpr;
  return static_cast<double>(errors) / static_cast<double>(scores.ik.size() + scores.ook.size());
}

std::vector<RocPoint> roc_curve(const LabeledScores& scores) {
  require_classes(scores);
  const auto all = merged_descending(scores);
  const double np = static_cast<double>(scores.ook.size());
  const double nn = static_cast<double>(scores.ik.size());
  std::vector<RocPoint> out;
  out.push_back({0.0, 0.0, all.front().score + 1.0});
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].positive ? tp : fp) += 1.0;
      ++j;
    }
    out.push_back({fp / nn, tp / np, all[i].score});
    i = j;
  }
  return out;
}

RunMetrics evaluate(const LabeledScores& scores, double fpr) {
  RunMetrics m;
  m.auroc = auroc(scores);
  m.auprc = auprc(scores);
  const auto op = tpr_at_fpr(scores, fpr);
  m.tpr_at_5fpr = op.tpr;
  m.threshold = op.threshold;
  m.der = detection_error_rate(scores, fpr);
  return m;
}

EvalReport balanced_eval_scores(std::span<const double> ik_pool, std::span<const double> ook_pool,
                                const EvalOptions& options) {
  if (ik_pool.empty() || ook_pool.empty()) throw Error(Errc::EmptyPool, "evaluation pool is empty");
  if (options.n_per_class == 0 || options.runs == 0) {
    throw Error(Errc::InvalidArgument, "n_per_class and runs must be positive");
  }
  const bool short_pool =
      ik_pool.size() < options.n_per_class || ook_pool.size() < options.n_per_class;
  if (short_pool && !options.allow_replacement) {
    throw Error(Errc::PoolTooSmall, "pools of " + std::to_string(ik_pool.size()) + " IK / " +
                                        std::to_string(ook_pool.size()) + " OoK cannot supply " +
                                        std::to_string(options.n_per_class) +
                                        " per class without replacement");
  }

  EvalReport report;
  report.n_per_class = options.n_per_class;
  report.seed = options.seed;
  report.with_replacement = short_pool;

  auto draw = [&](std::span<const double> pool, std::mt19937_64& rng) {
    std::vector<double> out;
    out.reserve(options.n_per_class);
    if (pool.size() >= options.n_per_class) {
      std::sample(pool.begin(), pool.end(), std::back_inserter(out), options.n_per_class, rng);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (std::size_t i = 0; i < options.n_per_class; ++i) out.push_back(pool[pick(rng)]);
    }
    return out;
  };

  for (std::size_t r = 0; r < options.runs; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    LabeledScores s;
    s.ik = draw(ik_pool, rng);
    s.ook = draw(ook_pool, rng);
    report.runs.push_back(evaluate(s, options.fpr));
  }

  for (const auto& m : report.runs) {
    report.mean.auroc += m.auroc;
    report.mean.auprc += m.auprc;
    report.mean.tpr_at_5fpr += m.tpr_at_5fpr;
    report.mean.der += m.der;
    report.mean.threshold += m.threshold;
  }
  const double runs = static_cast<double>(report.runs.size());
  report.mean.auroc /= runs;
  report.mean.auprc /= runs;
  report.mean.tpr_at_5fpr /= runs;
  report.mean.der /= runs;
  report.mean.threshold /= runs;
  return report;
}

EvalReport balanced_eval(const CorpusIndex& index, const Calibration& cal,
                         std::span<const Embedding> ik_pool, std::span<const Embedding> ook_pool,
                         const EvalOptions& options) {
  if (ik_pool.empty() || ook_pool.empty()) throw Error(Errc::EmptyPool, "evaluation pool is empty");
  const auto ik = score_queries(cal, index, ik_pool);
  const auto ook = score_queries(cal, index, ook_pool);
  auto report = balanced_eval_scores(ik, ook, options);
  report.kind = std::string(to_string(cal.stat.kind));
  return report;
}

std::string to_json(const EvalReport& report) {
  auto metrics_json = [](const RunMetrics& m) {
    nlohmann::ordered_json j;
    j["auroc"] = m.auroc;
    j["auprc"] = m.auprc;
    j["tpr_at_5fpr"] = m.tpr_at_5fpr;
    j["der"] = m.der;
    j["threshold"] = m.threshold;
    return j;
  };
  nlohmann::ordered_json j;
  j["kind"] = report.kind;
  j["n_per_class"] = report.n_per_class;
  j["runs_count"] = report.runs.size();
  j["seed"] = report.seed;
  j["with_replacement"] = report.with_replacement;
  j["auroc"] = report.mean.auroc;
  j["auprc"] = report.mean.auprc;
  j["tpr_at_5fpr"] = report.mean.tpr_at_5fpr;
  j["der"] = report.mean.der;
  j["threshold"] = report.mean.threshold;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& m : report.runs) j["runs"].push_back(metrics_json(m));
  return j.dump(2) + "\n";
}

std::string to_csv(const EvalReport& report) {
  std::string out = "run,auroc,auprc,tpr_at_5fpr,der,threshold\n";
  auto row = [&](const std::string& label, const RunMetrics& m) {
    out += label + "," + fmt17(m.auroc) + "," + fmt17(m.auprc) + "," + fmt17(m.tpr_at_5fpr) + "," +
           fmt17(m.der) + "," + fmt17(m.threshold) + "\n";
  };
  for (std::size_t i = 0; i < report.runs.size(); ++i) row(std::to_string(i), report.runs[i]);
  row("mean", report.mean);
  return out;
}

}  // namespace ookgate
