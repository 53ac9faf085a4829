#include "ookgate/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <map>

#include "commands.hpp"
#include "ookgate/error.hpp"

namespace ookgate {

namespace {

void add_embed_options(CLI::App* cmd, cli::EndpointArgs& e) {
  cmd->add_option("--embed-url", e.url, "Embeddings endpoint URL")->envname("OOKGATE_EMBED_URL");
  cmd->add_option("--embed-model", e.model, "Embedding model name");
  cmd->add_option("--api-key", e.api_key, "Bearer token for the endpoints")->envname("OOKGATE_API_KEY");
  cmd->add_option("--batch-size", e.batch_size, "Texts per embeddings request")->capture_default_str();
  cmd->add_option("--max-in-flight", e.max_in_flight, "Concurrent requests")->capture_default_str();
  cmd->add_option("--retries", e.retries, "Retries on transient failures")->capture_default_str();
  cmd->add_option("--backoff-ms", e.backoff_ms, "Initial retry backoff")->capture_default_str();
  cmd->add_option("--timeout-s", e.timeout_s, "Request timeout")->capture_default_str();
}

void add_synthesis_options(CLI::App* cmd, cli::SynthesisArgs& s) {
  cmd->add_option("--chunk-file", s.chunk_file, "Chunk JSONL ({\"id\",\"text\"} per line)");
  cmd->add_option("--chunks", s.chunks, "Chunks to sample uniformly (0 = all)")->capture_default_str();
  cmd->add_option("--per-chunk", s.per_chunk, "Questions per chunk")->capture_default_str();
  cmd->add_option("--template", s.template_id, "Prompt template: textbooks | pubmed")
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "Seed for chunk sampling and chat requests")->capture_default_str();
  cmd->add_option("--chat-url", s.chat.url, "Chat-completion endpoint URL")->envname("OOKGATE_CHAT_URL");
  cmd->add_option("--chat-model", s.chat.model, "Chat model name");
  cmd->add_option("--temperature", s.chat.temperature, "Sampling temperature")->capture_default_str();
}

// Lines of `key = value`; blank lines, '#' comments and [section] headers
// are skipped. Values may be quoted.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "config line without '=': " + line);
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.starts_with("--")) key = key.substr(2);
    kv[key] = value;
  }
  return kv;
}

// Appends config-file settings the command line did not already provide.
// Precedence: flags, then environment variables, then the config file.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].starts_with("--config=")) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (auto* s = app.get_subcommand_no_throw(a); s != nullptr) {
      sub = s;
      break;
    }
  }
  if (sub == nullptr) return args;

  auto given = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.starts_with(flag + "=")) return true;
    }
    return false;
  };
  for (const auto& [key, value] : read_config(config_path)) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || given(flag)) continue;
    const auto& env = opt->get_envname();
    if (!env.empty() && std::getenv(env.c_str()) != nullptr) continue;
    if (opt->get_type_size_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int run_cli(std::span<const std::string> raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical out-of-knowledge gating and drift detection for RAG corpora",
               "ookgate"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "key=value config file; command-line flags win");

  cli::IndexArgs index_args;
  auto* index = app.add_subcommand("index", "Chunk and embed a corpus into an index file");
  index->add_option("--docs", index_args.docs, "Raw documents JSONL, chunked before embedding")
      ->check(CLI::ExistingFile);
  index->add_option("--chunk-file", index_args.chunk_file, "Pre-chunked JSONL, embedded as-is")
      ->check(CLI::ExistingFile);
  index->add_option("--embeddings", index_args.embeddings, "Precomputed embedding file")
      ->check(CLI::ExistingFile);
  index->add_option("--chunk-size", index_args.chunk_size, "Chunk length in characters")
      ->capture_default_str();
  index->add_option("--overlap", index_args.overlap, "Chunk overlap in characters")
      ->capture_default_str();
  index->add_option("--metric", index_args.metric, "cosine | dot")->capture_default_str();
  index->add_option("--out", index_args.out, "Output index file (.emb)")->required();
  add_embed_options(index, index_args.embed);

  cli::SynthesizeArgs synth_args;
  auto* synth = app.add_subcommand("synthesize", "Generate synthetic in-knowledge queries");
  add_synthesis_options(synth, synth_args.synthesis);
  synth->get_option("--chunk-file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_args.out, "Output queries JSONL")->required();
  synth->add_option("--emb-out", synth_args.emb_out, "Also embed the questions into this file");
  synth->add_option("--metric", synth_args.metric, "Metric tag for --emb-out")->capture_default_str();
  add_embed_options(synth, synth_args.embed);

  cli::CalibrateArgs cal_args;
  auto* calibrate = app.add_subcommand("calibrate", "Build the null model from in-knowledge queries");
  calibrate->add_option("--index", cal_args.index, "Index file")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--queries", cal_args.queries, "Calibration query embeddings")
      ->check(CLI::ExistingFile);
  calibrate->add_flag("--synthesize", cal_args.synthesize, "Synthesize calibration queries first");
  calibrate->add_option("--provenance", cal_args.provenance,
                        "Override provenance: true_in_knowledge | synthetic");
  calibrate->add_option("--stat", cal_args.stat,
                        "mss | knn | avgknn | entropy | energy | fisher | simes")
      ->capture_default_str();
  calibrate->add_option("--k", cal_args.k, "Retrieval depth")->capture_default_str();
  calibrate->add_option("--rank-j", cal_args.rank_j, "KNN rank (default k)");
  calibrate->add_option("--tau", cal_args.tau, "Energy temperature")->capture_default_str();
  calibrate->add_option("--fisher-mode", cal_args.fisher_mode, "literal | log")->capture_default_str();
  calibrate->add_option("--out", cal_args.out, "Output calibration JSON")->required();
  add_synthesis_options(calibrate, cal_args.synthesis);
  add_embed_options(calibrate, cal_args.embed);

  cli::GateArgs gate_args;
  auto* gate = app.add_subcommand("gate", "Test individual queries against the calibration");
  gate->add_option("--calibration", gate_args.calibration, "Calibration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  gate->add_option("--index", gate_args.index, "Index file")->required()->check(CLI::ExistingFile);
  gate->add_option("--queries", gate_args.queries, "Query embeddings")->check(CLI::ExistingFile);
  gate->add_option("--text", gate_args.texts, "Query text, embedded via the endpoint (repeatable)");
  gate->add_option("--alpha", gate_args.alpha, "Significance level")->capture_default_str();
  gate->add_flag("--strict", gate_args.strict, "Exit 3 when any query is rejected");
  gate->add_option("--out", gate_args.out, "Write JSONL here instead of stdout");
  add_embed_options(gate, gate_args.embed);

  cli::DriftArgs drift_args;
  auto* drift = app.add_subcommand("drift", "Two-sample KS test of a query batch");
  drift->add_option("--calibration", drift_args.calibration, "Calibration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  drift->add_option("--index", drift_args.index, "Index file")->required()->check(CLI::ExistingFile);
  drift->add_option("--batch", drift_args.batch, "Batch query embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  drift->add_option("--alpha", drift_args.alpha, "Significance level")->capture_default_str();
  drift->add_flag("--strict", drift_args.strict, "Exit 3 when drift is detected");

  cli::EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Balanced AUROC/AUPRC/TPR/DER evaluation");
  eval->add_option("--calibration", eval_args.calibration, "Calibration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--index", eval_args.index, "Index file")->required()->check(CLI::ExistingFile);
  eval->add_option("--ik", eval_args.ik, "In-knowledge query embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--ook", eval_args.ook, "Out-of-knowledge query embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--n-per-class", eval_args.n_per_class, "Samples per class per run")
      ->capture_default_str();
  eval->add_option("--runs", eval_args.runs, "Independent runs")->capture_default_str();
  eval->add_option("--seed", eval_args.seed, "Master seed")->capture_default_str();
  eval->add_flag("--with-replacement", eval_args.with_replacement,
                 "Allow sampling with replacement from short pools");
  eval->add_option("--fpr", eval_args.fpr, "Operating false positive rate")->capture_default_str();
  eval->add_option("--out-json", eval_args.out_json, "EvalReport JSON path");
  eval->add_option("--out-csv", eval_args.out_csv, "Per-run CSV path");

  cli::ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Histogram and ROC plot data");
  report->add_option("--calibration", report_args.calibration, "Calibration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--scores", report_args.scores, "Score file, optionally label=path (repeatable)")
      ->required();
  report->add_option("--bins", report_args.bins, "Histogram bins")->capture_default_str();
  report->add_option("--alpha", report_args.alpha, "Level of the critical-value row")
      ->capture_default_str();
  report->add_option("--out-dir", report_args.out_dir, "Directory for histogram.csv and roc.csv")
      ->required();

  std::vector<std::string> args(raw_args.begin(), raw_args.end());
  try {
    args = merge_config(app, std::move(args));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  std::vector<const char*> argv{"ookgate"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*index) return cli::cmd_index(index_args, out, err);
    if (*synth) return cli::cmd_synthesize(synth_args, out, err);
    if (*calibrate) return cli::cmd_calibrate(cal_args, out, err);
    if (*gate) return cli::cmd_gate(gate_args, out, err);
    if (*drift) return cli::cmd_drift(drift_args, out, err);
    if (*eval) return cli::cmd_eval(eval_args, out, err);
    if (*report) return cli::cmd_report(report_args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ookgate
