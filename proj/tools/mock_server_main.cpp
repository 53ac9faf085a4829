// Serves the deterministic mock embeddings and chat endpoints until killed.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "ookgate/mock_endpoints.hpp"

namespace {
ookgate::mock::MockServer* g_server = nullptr;
void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock embeddings and chat-completion endpoints", "ookgate-mock-server"};
  int port = 0;
  std::size_t dim = 64;
  double center_norm = 0.75;
  std::string chat_mode = "normal";
  app.add_option("--port", port, "Port on 127.0.0.1 (0 picks a free one)")->capture_default_str();
  app.add_option("--dim", dim, "Embedding dimension")->capture_default_str();
  app.add_option("--center-norm", center_norm, "Length of the per-topic centre")->capture_default_str();
  app.add_option("--chat-mode", chat_mode, "normal | prose | inconsistent")
      ->check(CLI::IsMember({"normal", "prose", "inconsistent"}))
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  ookgate::mock::ServerOptions options;
  options.geometry.dim = dim;
  options.geometry.center_norm = center_norm;
  if (chat_mode == "prose") options.chat_mode = ookgate::mock::ChatMode::Prose;
  if (chat_mode == "inconsistent") options.chat_mode = ookgate::mock::ChatMode::InconsistentAnswer;

  ookgate::mock::MockServer server(options, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "embeddings: " << server.embed_url() << "\nchat: " << server.chat_url() << std::endl;
  server.wait();
  return 0;
}
