#pragma once

// Detection metrics over labelled scores, oriented larger => predicted
// out-of-knowledge (OoK, the positive class).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ookgate/calibration.hpp"

namespace ookgate {

struct LabeledScores {
  std::vector<double> ook;  // positives
  std::vector<double> ik;   // negatives
};

// P(OoK score > IK score) with ties counted 1/2, via midranks.
double auroc(const LabeledScores& scores);

// Average precision with tied scores handled as one block.
double auprc(const LabeledScores& scores);

struct TprAtFpr {
  double tpr = 0.0;
  double threshold = 0.0;     // critical value of the IK scores at level fpr
  double fpr_realized = 0.0;  // share of IK scores with p <= fpr
};

// The operating point uses the gate's rule: a score is flagged when its
// p-value against the IK-score eCDF is <= fpr.
TprAtFpr tpr_at_fpr(const LabeledScores& scores, double fpr = 0.05);

// (#IK flagged + #OoK missed) / (|IK| + |OoK|) under the same rule.
double detection_error_rate(const LabeledScores& scores, double fpr = 0.05);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

// One point per distinct score (predict OoK when score >= threshold),
// starting at (0, 0) and ending at (1, 1).
std::vector<RocPoint> roc_curve(const LabeledScores& scores);

struct RunMetrics {
  double auroc = 0.0;
  double auprc = 0.0;
  double tpr_at_5fpr = 0.0;
  double der = 0.0;
  double threshold = 0.0;
};

RunMetrics evaluate(const LabeledScores& scores, double fpr = 0.05);

struct EvalOptions {
  std::size_t n_per_class = 300;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  bool allow_replacement = true;  // otherwise a short pool throws PoolTooSmall
  double fpr = 0.05;
};

struct EvalReport {
  RunMetrics mean;
  std::vector<RunMetrics> runs;
  std::size_t n_per_class = 0;
  std::uint64_t seed = 0;
  bool with_replacement = false;
  std::string kind;
};

// Per run: draw n_per_class scores from each pool, compute all metrics.
// Runs are seeded from (seed, run index), so reports are reproducible.
EvalReport balanced_eval_scores(std::span<const double> ik_pool, std::span<const double> ook_pool,
                                const EvalOptions& options);

// Scores both pools with the calibrated statistic, then balanced_eval_scores.
EvalReport balanced_eval(const CorpusIndex& index, const Calibration& cal,
                         std::span<const Embedding> ik_pool, std::span<const Embedding> ook_pool,
                         const EvalOptions& options);

std::string to_json(const EvalReport& report);
// Header, one row per run, then a "mean" row.
std::string to_csv(const EvalReport& report);

}  // namespace ookgate
