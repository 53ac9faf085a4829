#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ookgate/calibration.hpp"
#include "ookgate/cli.hpp"
#include "ookgate/drift.hpp"
#include "ookgate/error.hpp"
#include "ookgate/metrics.hpp"

namespace fs = std::filesystem;

namespace ookgate::cli {

EndpointConfig EndpointArgs::config() const {
  EndpointConfig c;
  c.url = url;
  c.model = model;
  c.api_key = api_key;
  c.batch_size = batch_size;
  c.max_in_flight = max_in_flight;
  c.max_retries = retries;
  c.backoff = std::chrono::milliseconds(backoff_ms);
  c.timeout = std::chrono::seconds(timeout_s);
  c.temperature = temperature;
  return c;
}

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::string fixed_suffix(const fs::path& path, std::string_view suffix) {
  return path.string() + std::string(suffix);
}

CorpusIndex load_index(const fs::path& path) {
  auto set = read_embeddings(path);
  return CorpusIndex::build(set.vectors, std::move(set.ids), set.metric);
}

std::vector<Embedding> embed_or_throw(const EndpointArgs& e, std::span<const std::string> texts) {
  if (e.url.empty()) {
    throw Error(Errc::InvalidArgument, "an embeddings endpoint is required (--embed-url)");
  }
  return embed_texts(e.config(), texts);
}

struct SynthesisOutput {
  std::vector<SyntheticQuery> queries;
  std::vector<std::string> ids;
};

SynthesisOutput run_synthesis(const SynthesisArgs& s, const std::string& fallback_api_key,
                              const fs::path& jsonl_out, std::ostream& err) {
  if (s.chat.url.empty()) {
    throw Error(Errc::InvalidArgument, "a chat endpoint is required (--chat-url)");
  }
  const auto records = read_jsonl_records(s.chunk_file);
  std::vector<DocumentChunk> chunks;
  chunks.reserve(records.size());
  for (const auto& r : records) {
    DocumentChunk c;
    c.chunk_id = r.id;
    c.source_doc = r.id.substr(0, r.id.rfind('#'));
    c.text = r.text;
    c.end = r.text.size();
    chunks.push_back(std::move(c));
  }
  if (s.chunks > 0 && s.chunks < chunks.size()) chunks = sample_chunks(chunks, s.chunks, s.seed);

  auto chat = s.chat.config();
  if (chat.api_key.empty()) chat.api_key = fallback_api_key;
  chat.seed = s.seed;
  auto result = synthesize_queries(chat, chunks, s.template_id, s.per_chunk);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  SynthesisOutput out;
  std::string jsonl;
  for (std::size_t i = 0; i < result.queries.size(); ++i) {
    out.ids.push_back("syn-" + std::to_string(i));
    jsonl += to_json_line(result.queries[i], out.ids.back());
    jsonl += '\n';
  }
  write_text(jsonl_out, jsonl);
  out.queries = std::move(result.queries);
  return out;
}

std::vector<std::string> questions_of(const std::vector<SyntheticQuery>& qs) {
  std::vector<std::string> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(q.question);
  return out;
}

// One score per nonblank line: a bare number or a JSON object with a
// "statistic" field (the gate's output format).
std::vector<double> read_scores(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::IoError, "cannot read " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    double v = 0.0;
    if (line[b] == '{') {
      try {
        v = nlohmann::json::parse(line).at("statistic").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, where + ": " + e.what());
      }
    } else {
      const auto e = line.find_last_not_of(" \t\r");
      const auto res = std::from_chars(line.data() + b, line.data() + e + 1, v);
      if (res.ec != std::errc() || res.ptr != line.data() + e + 1) {
        throw Error(Errc::ParseError, where + ": not a number");
      }
    }
    if (!std::isfinite(v)) throw Error(Errc::ParseError, where + ": non-finite score");
    out.push_back(v);
  }
  if (out.empty()) throw Error(Errc::EmptySamples, path.string() + " contains no scores");
  return out;
}

}  // namespace

int cmd_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.docs.empty() && !a.chunk_file.empty()) {
    throw Error(Errc::InvalidArgument, "--docs and --chunk-file are mutually exclusive");
  }
  if (a.docs.empty() && a.chunk_file.empty() && a.embeddings.empty()) {
    throw Error(Errc::InvalidArgument, "one of --docs, --chunk-file or --embeddings is required");
  }

  std::vector<TextRecord> chunks;
  if (!a.docs.empty()) {
    const auto docs = read_jsonl_records(a.docs);
    for (auto& c : chunk_corpus(docs, a.chunk_size, a.overlap)) {
      chunks.push_back({std::move(c.chunk_id), std::move(c.text)});
    }
  } else if (!a.chunk_file.empty()) {
    chunks = read_jsonl_records(a.chunk_file);
  }

  EmbeddingSet set;
  if (!a.embeddings.empty()) {
    set = read_embeddings(a.embeddings);
    if (!chunks.empty()) {
      bool same = chunks.size() == set.ids.size();
      for (std::size_t i = 0; same && i < chunks.size(); ++i) same = chunks[i].id == set.ids[i];
      if (!same) {
        throw Error(Errc::IdCountMismatch, "chunk ids do not match the ids of " + a.embeddings);
      }
    }
  } else {
    std::vector<std::string> texts;
    for (const auto& c : chunks) {
      texts.push_back(c.text);
      set.ids.push_back(c.id);
    }
    if (texts.empty()) throw Error(Errc::EmptyCorpus, "no chunks to embed");
    set.vectors = embed_or_throw(a.embed, texts);
    set.metric = parse_metric(a.metric);
    set.dim = set.vectors.front().size();
  }

  std::vector<std::string> texts;
  for (const auto& c : chunks) texts.push_back(c.text);
  const auto index = CorpusIndex::build(set.vectors, set.ids, set.metric, texts);

  const fs::path out_path = a.out;
  write_embeddings(out_path, set);
  nlohmann::ordered_json manifest;
  manifest["n"] = index.size();
  manifest["dim"] = index.dim();
  manifest["metric"] = to_string(set.metric);
  manifest["fingerprint"] = index.fingerprint();
  manifest["embeddings"] = out_path.filename().string();
  manifest["ids"] = ids_sidecar(out_path).filename().string();
  if (!chunks.empty()) {
    const fs::path chunk_path = fixed_suffix(out_path, ".chunks.jsonl");
    write_jsonl_records(chunk_path, chunks);
    manifest["chunks"] = chunk_path.filename().string();
  } else {
    manifest["chunks"] = nullptr;
  }
  write_text(fixed_suffix(out_path, ".manifest.json"), manifest.dump(2) + "\n");

  out << "indexed n=" << index.size() << " dim=" << index.dim()
      << " metric=" << to_string(set.metric) << " fingerprint=" << index.fingerprint() << "\n";
  (void)err;
  return kExitOk;
}

int cmd_synthesize(const SynthesizeArgs& a, std::ostream& out, std::ostream& err) {
  const auto syn = run_synthesis(a.synthesis, a.embed.api_key, a.out, err);
  if (!a.emb_out.empty()) {
    EmbeddingSet set;
    set.vectors = embed_or_throw(a.embed, questions_of(syn.queries));
    set.dim = set.vectors.front().size();
    set.metric = parse_metric(a.metric);
    set.ids = syn.ids;
    write_embeddings(a.emb_out, set);
  }
  out << "synthesized n=" << syn.queries.size() << "\n";
  return kExitOk;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.queries.empty() == !a.synthesize) {
    throw Error(Errc::InvalidArgument, "exactly one of --queries and --synthesize is required");
  }
  StatisticSpec spec;
  spec.kind = parse_statistic(a.stat);
  spec.k = a.k;
  spec.rank_j = a.rank_j;
  spec.tau = a.tau;
  spec.validate();
  const auto fisher_mode = parse_fisher_mode(a.fisher_mode);

  const auto index = load_index(a.index);
  std::vector<Embedding> queries;
  Provenance provenance = Provenance::TrueInKnowledge;
  if (a.synthesize) {
    auto s = a.synthesis;
    if (s.chunk_file.empty()) s.chunk_file = fixed_suffix(a.index, ".chunks.jsonl");
    if (!fs::exists(s.chunk_file)) {
      throw Error(Errc::IoError, "chunk file not found: " + s.chunk_file);
    }
    const auto syn = run_synthesis(s, a.embed.api_key, fixed_suffix(a.out, ".synthetic.jsonl"), err);
    queries = embed_or_throw(a.embed, questions_of(syn.queries));
    provenance = Provenance::Synthetic;
  } else {
    queries = read_embeddings(a.queries).vectors;
  }
  if (!a.provenance.empty()) provenance = parse_provenance(a.provenance);

  const auto cal = build_calibration(index, queries, spec, provenance, fisher_mode);
  save_calibration(cal, a.out);
  out << "calibrated kind=" << to_string(cal.stat.kind) << " k=" << cal.stat.k
      << " n_cal=" << cal.n_cal() << " provenance=" << to_string(cal.provenance) << "\n";
  return kExitOk;
}

int cmd_gate(const GateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.queries.empty() == a.texts.empty()) {
    throw Error(Errc::InvalidArgument, "exactly one of --queries and --text is required");
  }
  const auto cal = load_calibration(a.calibration);
  const auto index = load_index(a.index);

  EmbeddingSet queries;
  if (!a.queries.empty()) {
    queries = read_embeddings(a.queries);
  } else {
    queries.vectors = embed_or_throw(a.embed, a.texts);
    for (std::size_t i = 0; i < a.texts.size(); ++i) queries.ids.push_back("text-" + std::to_string(i));
  }

  std::ostringstream lines;
  bool any_reject = false;
  bool warned = false;
  for (std::size_t i = 0; i < queries.vectors.size(); ++i) {
    const auto d = gate_query(cal, index, queries.vectors[i], a.alpha);
    if (!d.fingerprint_match && !warned) {
      err << "warning: index fingerprint differs from the one recorded at calibration\n";
      warned = true;
    }
    nlohmann::ordered_json j;
    j["query_id"] = queries.ids[i];
    j["statistic"] = d.statistic;
    j["p_value"] = d.p_value;
    j["reject"] = d.reject;
    lines << j.dump() << "\n";
    any_reject = any_reject || d.reject;
  }
  if (a.out.empty()) {
    out << lines.str();
  } else {
    write_text(a.out, lines.str());
  }
  return a.strict && any_reject ? kExitRejected : kExitOk;
}

int cmd_drift(const DriftArgs& a, std::ostream& out, std::ostream& err) {
  const auto cal = load_calibration(a.calibration);
  const auto index = load_index(a.index);
  if (index.fingerprint() != cal.corpus_fingerprint) {
    err << "warning: index fingerprint differs from the one recorded at calibration\n";
  }
  const auto batch = read_embeddings(a.batch);
  const auto d = drift_test(cal, batch.vectors, index, a.alpha);
  out << to_json(d) << "\n";
  return a.strict && d.reject ? kExitRejected : kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto cal = load_calibration(a.calibration);
  const auto index = load_index(a.index);
  if (index.fingerprint() != cal.corpus_fingerprint) {
    err << "warning: index fingerprint differs from the one recorded at calibration\n";
  }
  const auto ik = read_embeddings(a.ik);
  const auto ook = read_embeddings(a.ook);
  EvalOptions opts;
  opts.n_per_class = a.n_per_class;
  opts.runs = a.runs;
  opts.seed = a.seed;
  opts.allow_replacement = a.with_replacement;
  opts.fpr = a.fpr;
  const auto report = balanced_eval(index, cal, ik.vectors, ook.vectors, opts);
  if (!a.out_json.empty()) write_text(a.out_json, to_json(report) + "\n");
  if (!a.out_csv.empty()) write_text(a.out_csv, to_csv(report));
  out << "kind=" << report.kind << " auroc=" << num(report.mean.auroc)
      << " auprc=" << num(report.mean.auprc) << " tpr_at_5fpr=" << num(report.mean.tpr_at_5fpr)
      << " der=" << num(report.mean.der) << "\n";
  return kExitOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  if (a.bins == 0) throw Error(Errc::InvalidArgument, "--bins must be positive");
  const auto cal = load_calibration(a.calibration);

  std::vector<std::pair<std::string, std::vector<double>>> sources;
  std::set<std::string> labels;
  for (const auto& spec : a.scores) {
    const auto eq = spec.find('=');
    std::string label = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    if (!labels.insert(label).second) {
      throw Error(Errc::InvalidArgument, "duplicate score label '" + label + "'");
    }
    sources.emplace_back(std::move(label), read_scores(path));
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [_, v] : sources) {
    lo = std::min(lo, *std::min_element(v.begin(), v.end()));
    hi = std::max(hi, *std::max_element(v.begin(), v.end()));
  }
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(a.bins);

  std::string hist = "kind,source,bin,lo,hi,count\n";
  for (const auto& [label, v] : sources) {
    std::vector<std::size_t> counts(a.bins, 0);
    for (double x : v) {
      auto b = static_cast<std::size_t>((x - lo) / width);
      counts[std::min(b, a.bins - 1)]++;
    }
    for (std::size_t b = 0; b < a.bins; ++b) {
      const double edge_hi = b + 1 == a.bins ? hi : lo + width * static_cast<double>(b + 1);
      hist += "histogram," + label + "," + std::to_string(b) + "," +
              num(lo + width * static_cast<double>(b)) + "," + num(edge_hi) + "," +
              std::to_string(counts[b]) + "\n";
    }
  }
  const double c = critical_value(cal, a.alpha);
  hist += "critical_value,alpha=" + num(a.alpha) + ",," + num(c) + "," + num(c) + ",\n";

  // Each source as positives against the calibration pool as negatives.
  std::string roc = "source,fpr,tpr,threshold\n";
  for (const auto& [label, v] : sources) {
    LabeledScores ls{v, cal.sorted_stats};
    for (const auto& p : roc_curve(ls)) {
      roc += label + "," + num(p.fpr) + "," + num(p.tpr) + "," + num(p.threshold) + "\n";
    }
  }

  fs::create_directories(a.out_dir);
  write_text(fs::path(a.out_dir) / "histogram.csv", hist);
  write_text(fs::path(a.out_dir) / "roc.csv", roc);
  out << "wrote " << (fs::path(a.out_dir) / "histogram.csv").string() << " and "
      << (fs::path(a.out_dir) / "roc.csv").string() << "\n";
  (void)err;
  return kExitOk;
}

}  // namespace ookgate::cli
