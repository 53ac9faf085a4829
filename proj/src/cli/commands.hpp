#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ookgate/ingest.hpp"

namespace ookgate::cli {

struct EndpointArgs {
  std::string url;
  std::string model;
  std::string api_key;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  int retries = 3;
  long backoff_ms = 250;
  long timeout_s = 120;
  double temperature = 0.7;

  EndpointConfig config() const;
};

struct IndexArgs {
  std::string docs;
  std::string chunk_file;
  std::string embeddings;
  std::size_t chunk_size = 1000;
  std::size_t overlap = 200;
  std::string metric = "cosine";
  std::string out;
  EndpointArgs embed;
};

struct SynthesisArgs {
  std::string chunk_file;
  std::size_t chunks = 0;  // 0 = all
  std::size_t per_chunk = 1;
  std::string template_id = "textbooks";
  std::uint64_t seed = 0;
  EndpointArgs chat;
};

struct SynthesizeArgs {
  SynthesisArgs synthesis;
  std::string out;
  std::string emb_out;
  std::string metric = "cosine";
  EndpointArgs embed;
};

struct CalibrateArgs {
  std::string index;
  std::string queries;
  bool synthesize = false;
  std::string provenance;
  std::string stat = "energy";
  std::size_t k = 32;
  std::size_t rank_j = 0;
  double tau = 1.0;
  std::string fisher_mode = "literal";
  std::string out;
  SynthesisArgs synthesis;
  EndpointArgs embed;
};

struct GateArgs {
  std::string calibration;
  std::string index;
  std::string queries;
  std::vector<std::string> texts;
  double alpha = 0.05;
  bool strict = false;
  std::string out;
  EndpointArgs embed;
};

struct DriftArgs {
  std::string calibration;
  std::string index;
  std::string batch;
  double alpha = 0.05;
  bool strict = false;
};

struct EvalArgs {
  std::string calibration;
  std::string index;
  std::string ik;
  std::string ook;
  std::size_t n_per_class = 300;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  bool with_replacement = false;
  double fpr = 0.05;
  std::string out_json;
  std::string out_csv;
};

struct ReportArgs {
  std::string calibration;
  std::vector<std::string> scores;  // "label=path" or "path"
  std::size_t bins = 50;
  double alpha = 0.05;
  std::string out_dir;
};

int cmd_index(const IndexArgs& a, std::ostream& out, std::ostream& err);
int cmd_synthesize(const SynthesizeArgs& a, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err);
int cmd_gate(const GateArgs& a, std::ostream& out, std::ostream& err);
int cmd_drift(const DriftArgs& a, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err);

}  // namespace ookgate::cli
