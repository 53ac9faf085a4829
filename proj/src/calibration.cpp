#include "ookgate/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ookgate/error.hpp"
#include "ookgate/hashing.hpp"

namespace ookgate {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Synthetic ? "synthetic" : "true_in_knowledge";
}

Provenance parse_provenance(std::string_view token) {
  if (token == "synthetic") return Provenance::Synthetic;
  if (token == "true_in_knowledge") return Provenance::TrueInKnowledge;
  throw Error(Errc::InvalidArgument, "unknown provenance '" + std::string(token) + "'");
}

std::string_view to_string(FisherMode mode) {
  return mode == FisherMode::LogTransform ? "log" : "literal";
}

FisherMode parse_fisher_mode(std::string_view token) {
  if (token == "literal") return FisherMode::Literal;
  if (token == "log") return FisherMode::LogTransform;
  throw Error(Errc::InvalidArgument, "unknown fisher mode '" + std::string(token) + "'");
}

void Calibration::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvariantViolation, what); };
  if (sorted_stats.empty()) fail("calibration holds no statistics");
  if (dim == 0) fail("dim must be positive");
  try {
    stat.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (stat.rank_j == 0) fail("rank_j must be explicit in a calibration");
  if (rank_pools.size() != stat.k) {
    fail("expected " + std::to_string(stat.k) + " rank pools, found " +
         std::to_string(rank_pools.size()));
  }
  auto check_list = [&](const std::vector<double>& v, const std::string& name) {
    if (v.size() != n_cal()) fail(name + " length " + std::to_string(v.size()) + " != n_cal");
    for (double x : v) {
      if (!std::isfinite(x)) fail(name + " contains a non-finite value");
    }
    if (!std::is_sorted(v.begin(), v.end())) fail(name + " is not sorted ascending");
  };
  check_list(sorted_stats, "sorted_stats");
  for (std::size_t i = 0; i < rank_pools.size(); ++i) {
    check_list(rank_pools[i], "rank_pools[" + std::to_string(i) + "]");
  }
}

double ecdf_eval(std::span<const double> sorted_samples, double t) {
  if (sorted_samples.empty()) throw Error(Errc::EmptySamples, "eCDF of an empty sample");
  const auto count = static_cast<double>(
      std::upper_bound(sorted_samples.begin(), sorted_samples.end(), t) - sorted_samples.begin());
  return (1.0 + count) / (1.0 + static_cast<double>(sorted_samples.size()));
}

double p_value(std::span<const double> sorted_samples, double t) {
  return 1.0 - ecdf_eval(sorted_samples, t);
}

double p_value(const Calibration& cal, double t) { return p_value(cal.sorted_stats, t); }

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::AlphaOutOfRange, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

void require_p_values(std::span<const double> p_values) {
  if (p_values.empty()) throw Error(Errc::InvalidArgument, "no p-values to combine");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::PValueOutOfRange, "p-value " + std::to_string(p) + " outside [0, 1]");
    }
  }
}

double combine(const Calibration& cal, std::span<const double> sims) {
  const auto p = per_rank_p_values(cal, sims);
  if (cal.stat.kind == Statistic::Fisher) {
    return fisher_combine(p, cal.fisher_mode, 1.0 / (1.0 + static_cast<double>(cal.n_cal())));
  }
  return -simes_combine(p);
}

}  // namespace

double critical_value(std::span<const double> sorted_samples, double alpha) {
  require_alpha(alpha);
  if (sorted_samples.empty()) throw Error(Errc::EmptySamples, "critical value of an empty sample");
  const double level = 1.0 - alpha;
  // F is non-decreasing along the sorted samples, and F(max) = 1 > level.
  auto it = std::partition_point(sorted_samples.begin(), sorted_samples.end(),
                                 [&](double t) { return !(ecdf_eval(sorted_samples, t) > level); });
  return *it;
}

double critical_value(const Calibration& cal, double alpha) {
  return critical_value(cal.sorted_stats, alpha);
}

double fisher_combine(std::span<const double> p_values, FisherMode mode, double floor) {
  require_p_values(p_values);
  double acc = 0.0;
  for (double p : p_values) {
    acc += mode == FisherMode::Literal ? p : std::log(std::max(p, floor));
  }
  return -2.0 * acc;
}

double simes_combine(std::span<const double> p_values) {
  require_p_values(p_values);
  std::vector<double> sorted(p_values.begin(), p_values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<double>(sorted.size());
  double best = sorted.front() * k;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    best = std::min(best, k * sorted[i] / static_cast<double>(i + 1));
  }
  return best;
}

std::vector<double> per_rank_p_values(const Calibration& cal, std::span<const double> sims) {
  const std::size_t k = cal.rank_pools.size();
  if (sims.size() < k) {
    throw Error(Errc::NeighborListTooShort, std::to_string(sims.size()) +
                                                " neighbours but the calibration uses k = " +
                                                std::to_string(k));
  }
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = p_value(cal.rank_pools[i], -sims[i]);
  return p;
}

std::vector<double> per_rank_p_values(const Calibration& cal, const NeighborList& nb) {
  const auto sims = nb.similarities();
  return per_rank_p_values(cal, sims);
}

Calibration build_calibration(const CorpusIndex& index, std::span<const Embedding> queries,
                              StatisticSpec stat, Provenance provenance, FisherMode fisher_mode) {
  stat.validate();
  if (queries.empty()) throw Error(Errc::EmptyCalibrationSet, "no calibration queries");

  const std::size_t k = std::min(stat.k, index.size());
  Calibration cal;
  cal.stat = stat;
  cal.stat.k = k;
  cal.stat.rank_j = std::min(stat.effective_rank(), k);
  cal.fisher_mode = fisher_mode;
  cal.metric = index.metric();
  cal.dim = index.dim();
  cal.provenance = provenance;
  cal.corpus_fingerprint = index.fingerprint();
  cal.rank_pools.assign(k, {});
  for (auto& pool : cal.rank_pools) pool.reserve(queries.size());

  std::vector<std::vector<double>> all_sims;
  all_sims.reserve(queries.size());
  for (const auto& q : queries) {
    auto sims = index.search(q, k).similarities();
    for (std::size_t i = 0; i < k; ++i) cal.rank_pools[i].push_back(-sims[i]);
    all_sims.push_back(std::move(sims));
  }
  for (auto& pool : cal.rank_pools) std::sort(pool.begin(), pool.end());

  // Meta statistics are scored against the complete pools, so they need a
  // second pass once every query has contributed.
  cal.sorted_stats.reserve(queries.size());
  for (const auto& sims : all_sims) {
    cal.sorted_stats.push_back(is_meta(stat.kind) ? combine(cal, sims)
                                                  : compute_score(cal.stat, sims));
  }
  std::sort(cal.sorted_stats.begin(), cal.sorted_stats.end());
  return cal;
}

double score_query(const Calibration& cal, const CorpusIndex& index, std::span<const float> query) {
  if (index.dim() != cal.dim) {
    throw Error(Errc::DimensionMismatch, "calibration dimension " + std::to_string(cal.dim) +
                                             " vs index dimension " + std::to_string(index.dim()));
  }
  const auto sims = index.search(query, cal.stat.k).similarities();
  return is_meta(cal.stat.kind) ? combine(cal, sims) : compute_score(cal.stat, sims);
}

std::vector<double> score_queries(const Calibration& cal, const CorpusIndex& index,
                                  std::span<const Embedding> queries) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(score_query(cal, index, q));
  return out;
}

GateDecision gate_query(const Calibration& cal, const CorpusIndex& index,
                        std::span<const float> query, double alpha) {
  require_alpha(alpha);
  GateDecision d;
  d.alpha = alpha;
  d.stat = cal.stat;
  d.fingerprint_match = cal.corpus_fingerprint == index.fingerprint();
  d.statistic = score_query(cal, index, query);
  // Simes already yields a global p-value; its statistic is the negation.
  d.p_value = cal.stat.kind == Statistic::Simes ? -d.statistic : p_value(cal, d.statistic);
  d.reject = d.p_value <= alpha;
  return d;
}

namespace {

ordered_json content_json(const Calibration& cal) {
  ordered_json j;
  j["version"] = kCalibrationVersion;
  j["kind"] = to_string(cal.stat.kind);
  j["k"] = cal.stat.k;
  j["rank_j"] = cal.stat.rank_j;
  j["tau"] = cal.stat.tau;
  j["fisher_mode"] = to_string(cal.fisher_mode);
  j["metric"] = to_string(cal.metric);
  j["dim"] = cal.dim;
  j["n_cal"] = cal.n_cal();
  j["provenance"] = to_string(cal.provenance);
  j["corpus_fingerprint"] = cal.corpus_fingerprint;
  j["sorted_stats"] = cal.sorted_stats;
  j["rank_pools"] = cal.rank_pools;
  return j;
}

}  // namespace

std::string calibration_to_json(const Calibration& cal) {
  ordered_json j = content_json(cal);
  j["checksum"] = sha256_hex(j.dump());
  return j.dump() + "\n";
}

void save_calibration(const Calibration& cal, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << calibration_to_json(cal);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Calibration calibration_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("calibration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ParseError, "calibration must be a JSON object");
  if (!j.contains("version") || j["version"] != kCalibrationVersion) {
    throw Error(Errc::UnsupportedVersion,
                "expected version \"" + std::string(kCalibrationVersion) + "\", found " +
                    (j.contains("version") ? j["version"].dump() : std::string("none")));
  }

  Calibration cal;
  std::size_t n_cal = 0;
  try {
    cal.stat.kind = parse_statistic(j.at("kind").get<std::string>());
    cal.stat.k = j.at("k").get<std::size_t>();
    cal.stat.rank_j = j.at("rank_j").get<std::size_t>();
    cal.stat.tau = j.at("tau").get<double>();
    cal.fisher_mode = parse_fisher_mode(j.value("fisher_mode", std::string("literal")));
    cal.metric = parse_metric(j.at("metric").get<std::string>());
    cal.dim = j.at("dim").get<std::size_t>();
    n_cal = j.at("n_cal").get<std::size_t>();
    cal.provenance = parse_provenance(j.at("provenance").get<std::string>());
    cal.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
    cal.sorted_stats = j.at("sorted_stats").get<std::vector<double>>();
    cal.rank_pools = j.at("rank_pools").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed calibration field: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ParseError, e.what());
  }

  if (n_cal != cal.sorted_stats.size()) {
    throw Error(Errc::InvariantViolation, "n_cal does not match sorted_stats length");
  }
  cal.validate();

  if (j.contains("checksum")) {
    const auto stored = j["checksum"];
    j.erase("checksum");
    if (!stored.is_string() || stored.get<std::string>() != sha256_hex(j.dump())) {
      throw Error(Errc::ChecksumFailure, "calibration content does not match its checksum");
    }
  }
  return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

}  // namespace ookgate
