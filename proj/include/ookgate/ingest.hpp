#pragma once

// Getting text into the system: fixed-size chunking, JSONL records, the
// binary embedding file, an embeddings-API client, and LM-driven synthesis
// of in-knowledge calibration queries.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ookgate/vecstore.hpp"

namespace ookgate {

// ---------------------------------------------------------------------------
// Records and chunking

// One {"id", "text"} JSONL line.
struct TextRecord {
  std::string id;
  std::string text;
};

std::vector<TextRecord> read_jsonl_records(const std::filesystem::path& path);
void write_jsonl_records(const std::filesystem::path& path, std::span<const TextRecord> records);

struct DocumentChunk {
  std::string chunk_id;  // "<doc_id>#<index>"
  std::string source_doc;
  std::string text;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;

  bool operator==(const DocumentChunk&) const = default;
};

// Sliding windows of `size` characters (UTF-8 code points) advancing by
// size − overlap; the last window is the first one that reaches the end of
// the document. Empty documents produce no chunks.
// Throws InvalidChunking unless size > overlap.
std::vector<DocumentChunk> chunk_corpus(std::span<const TextRecord> docs, std::size_t size,
                                        std::size_t overlap);

// Uniform sample without replacement, returned in corpus order.
std::vector<DocumentChunk> sample_chunks(std::span<const DocumentChunk> chunks, std::size_t count,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Embedding file: 24-byte little-endian header
//   "OOKG" | version u32 | dim u32 | count u64 | metric u32
// followed by count·dim float32 values; ids live in "<path>.ids", one per line.

inline constexpr std::uint32_t kEmbeddingFileVersion = 1;

struct EmbeddingSet {
  std::size_t dim = 0;
  Metric metric = Metric::Cosine;
  std::vector<Embedding> vectors;
  std::vector<std::string> ids;

  bool operator==(const EmbeddingSet&) const = default;
};

std::filesystem::path ids_sidecar(const std::filesystem::path& path);

// Throws InvalidArgument (ragged rows, ids with newlines, id count) or IoError.
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

// Throws IoError, BadMagic, InvalidHeader, TruncatedPayload, IdCountMismatch.
EmbeddingSet read_embeddings(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// HTTP endpoints

struct EndpointConfig {
  std::string url;  // full URL, e.g. http://localhost:8080/v1/embeddings
  std::string api_key;
  std::string model;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
  std::chrono::seconds timeout{120};
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;  // forwarded to chat requests when set
};

// One vector per text, in input order, whatever the batching.
// Throws EmptyText, EndpointError, DimensionDrift.
std::vector<Embedding> embed_texts(const EndpointConfig& config, std::span<const std::string> texts);

struct ChatMessage {
  std::string role;
  std::string content;
};

// Content of the first choice. Throws EndpointError after retries.
std::string chat_complete(const EndpointConfig& config, std::span<const ChatMessage> messages,
                          std::optional<std::uint64_t> seed = std::nullopt);

// ---------------------------------------------------------------------------
// Synthetic in-knowledge queries

struct SyntheticQuery {
  std::string question;
  std::optional<std::map<std::string, std::string>> options;
  std::optional<std::string> answer;
  std::string source_chunk;
  std::string raw_payload;

  bool operator==(const SyntheticQuery&) const = default;
};

// Built-in prompt templates: "textbooks" (multiple-choice vignettes) and
// "pubmed" (yes/no/maybe research questions).
std::vector<std::string> synthesis_template_ids();

// System + user messages with {Examples} and {Context} filled in.
// Throws InvalidArgument for an unknown template.
std::vector<ChatMessage> render_synthesis_prompt(std::string_view template_id,
                                                 std::string_view context);

// Accepts a bare JSON object, a fenced block, or an object embedded in
// prose; trailing commas are tolerated. Throws ParseError or
// InconsistentAnswerKey.
SyntheticQuery parse_synthetic_query(std::string_view content, std::string_view source_chunk);

struct SynthesisResult {
  std::vector<SyntheticQuery> queries;
  std::vector<std::string> warnings;
};

// n_per_chunk chat requests per chunk. A malformed reply is retried once and
// then skipped with a warning; an inconsistent answer key is skipped.
// Throws EndpointError, or NoSuccessfulParses when nothing parsed at all.
SynthesisResult synthesize_queries(const EndpointConfig& chat, std::span<const DocumentChunk> chunks,
                                   std::string_view template_id, std::size_t n_per_chunk);

// {"id", "text", "source_chunk", "options", "answer", "raw_payload"}; the
// id/text pair makes the file readable by read_jsonl_records.
std::string to_json_line(const SyntheticQuery& q, std::string_view id);

}  // namespace ookgate
