#pragma once

// Deterministic stand-ins for an embeddings API and a chat-completion API.
//
// The embedder maps a text to centre(topic) + noise(text), where the topic is
// the first "topic-<name>" token in the text and the noise is seeded by a
// hash of the whole text. Texts without a topic token are pure noise. The
// chat model reads the {Context} block of a synthesis prompt and answers with
// a quiz question about that context's topic, so synthetic questions embed
// near the chunks they were generated from.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ookgate/vecstore.hpp"

namespace ookgate::mock {

struct EmbedderGeometry {
  std::size_t dim = 64;
  double center_norm = 0.75;
  double noise_rms = 1.0;  // RMS length of the noise vector
};

std::optional<std::string> find_topic(std::string_view text);
Embedding embed_text(std::string_view text, const EmbedderGeometry& geometry);

// The mock LM's reply to a synthesis prompt's user message.
std::string quiz_reply(std::string_view user_message, std::uint64_t seed);

enum class ChatMode { Normal, Prose, InconsistentAnswer };

struct ServerOptions {
  EmbedderGeometry geometry;
  ChatMode chat_mode = ChatMode::Normal;
  std::size_t fail_first = 0;  // first N requests answer fail_status
  int fail_status = 503;
  std::optional<std::size_t> drift_dim_from;  // embedding requests from this index on get dim + 1
};

class MockServer {
 public:
  explicit MockServer(ServerOptions options = {}, int port = 0);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string embed_url() const;
  std::string chat_url() const;
  std::size_t requests() const { return requests_.load(); }
  std::size_t embed_requests() const { return embed_requests_.load(); }

  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> embed_requests_{0};
};

}  // namespace ookgate::mock
