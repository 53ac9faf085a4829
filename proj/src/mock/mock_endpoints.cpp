#include "ookgate/mock_endpoints.hpp"

#include <httplib.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include <json.hpp>

#include "ookgate/hashing.hpp"

namespace ookgate::mock {

namespace {

std::vector<double> gaussian(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::string hex8(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

// Text between the first two "---" lines, or the whole message.
std::string_view context_block(std::string_view message) {
  const auto open = message.find("---\n");
  if (open == std::string_view::npos) return message;
  const auto start = open + 4;
  const auto close = message.find("\n---", start);
  if (close == std::string_view::npos) return message.substr(start);
  return message.substr(start, close - start);
}

}  // namespace

std::optional<std::string> find_topic(std::string_view text) {
  constexpr std::string_view kPrefix = "topic-";
  for (auto at = text.find(kPrefix); at != std::string_view::npos; at = text.find(kPrefix, at + 1)) {
    auto end = at + kPrefix.size();
    while (end < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_')) {
      ++end;
    }
    if (end > at + kPrefix.size()) return std::string(text.substr(at, end - at));
  }
  return std::nullopt;
}

Embedding embed_text(std::string_view text, const EmbedderGeometry& geometry) {
  const std::size_t dim = geometry.dim;
  std::vector<double> v(dim, 0.0);
  if (auto topic = find_topic(text)) {
    auto center = gaussian(fnv1a64("center:" + *topic), dim);
    double norm = 0.0;
    for (double x : center) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) v[i] = center[i] / norm * geometry.center_norm;
  }
  const auto noise = gaussian(fnv1a64(text), dim);
  const double sigma = geometry.noise_rms / std::sqrt(static_cast<double>(dim));
  Embedding out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] + sigma * noise[i]);
  return out;
}

std::string quiz_reply(std::string_view user_message, std::uint64_t seed) {
  const auto context = context_block(user_message);
  const auto topic = find_topic(context).value_or("general");
  const auto passage = hex8(fnv1a64(context));
  const auto variant = fnv1a64(std::string(context) + "#" + std::to_string(seed));
  nlohmann::ordered_json j;
  j["question"] = "Regarding " + topic + ", which statement is supported by passage " + passage +
                  " (item " + hex8(variant) + ")?";
  j["options"] = {{"A", "the first claim"},
                  {"B", "the second claim"},
                  {"C", "the third claim"},
                  {"D", "none of these"}};
  j["answer"] = std::string(1, static_cast<char>('A' + variant % 4));
  return j.dump();
}

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
  ServerOptions options;
};

MockServer::MockServer(ServerOptions options, int port) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  auto& srv = impl_->server;

  auto should_fail = [this](httplib::Response& res) {
    const auto n = requests_++;
    if (n < impl_->options.fail_first) {
      res.status = impl_->options.fail_status;
      res.set_content(R"({"error":"injected failure"})", "application/json");
      return true;
    }
    return false;
  };

  srv.Post("/v1/embeddings", [this, should_fail](const httplib::Request& req, httplib::Response& res) {
    if (should_fail(res)) return;
    const auto call = embed_requests_++;
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      return;
    }
    auto geometry = impl_->options.geometry;
    if (impl_->options.drift_dim_from && call >= *impl_->options.drift_dim_from) geometry.dim += 1;
    nlohmann::json reply;
    reply["object"] = "list";
    reply["data"] = nlohmann::json::array();
    const auto& inputs = body["input"];
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto v = embed_text(inputs[i].get<std::string>(), geometry);
      reply["data"].push_back({{"object", "embedding"}, {"index", i}, {"embedding", v}});
    }
    reply["model"] = body.value("model", "mock-embedder");
    res.set_content(reply.dump(), "application/json");
  });

  srv.Post("/v1/chat/completions",
           [this, should_fail](const httplib::Request& req, httplib::Response& res) {
             if (should_fail(res)) return;
             nlohmann::json body;
             try {
               body = nlohmann::json::parse(req.body);
             } catch (const nlohmann::json::exception&) {
               res.status = 400;
               return;
             }
             std::string user;
             for (const auto& m : body["messages"]) {
               if (m.value("role", "") == "user") user = m.value("content", "");
             }
             const std::uint64_t seed = body.value("seed", std::uint64_t{0});
             std::string content;
             switch (impl_->options.chat_mode) {
               case ChatMode::Normal:
                 content = quiz_reply(user, seed);
                 break;
               case ChatMode::Prose:
                 content = "Sure! Here is a thoughtful question about the passage, without any JSON.";
                 break;
               case ChatMode::InconsistentAnswer:
                 content = R"({"question":"Which option?","options":{"A":"x","B":"y"},"answer":"C"})";
                 break;
             }
             nlohmann::json reply;
             reply["object"] = "chat.completion";
             reply["choices"] = nlohmann::json::array(
                 {{{"index", 0},
                   {"message", {{"role", "assistant"}, {"content", content}}},
                   {"finish_reason", "stop"}}});
             res.set_content(reply.dump(), "application/json");
           });

  if (port == 0) {
    port_ = srv.bind_to_any_port("127.0.0.1");
  } else {
    port_ = srv.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ < 0) throw std::runtime_error("mock server could not bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockServer::~MockServer() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::embed_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1/embeddings";
}

std::string MockServer::chat_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
}

void MockServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockServer::stop() { impl_->server.stop(); }

}  // namespace ookgate::mock
