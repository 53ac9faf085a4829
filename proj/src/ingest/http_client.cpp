#include <httplib.h>

#include <thread>

#include "http.hpp"
#include "ookgate/error.hpp"

namespace ookgate::detail {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::InvalidArgument, "endpoint URL needs a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

nlohmann::json post_json(const EndpointConfig& config, const nlohmann::json& body) {
  if (config.url.empty()) throw Error(Errc::InvalidArgument, "no endpoint URL configured");
  const auto [origin, path] = split_url(config.url);
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(config.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  const std::string payload = body.dump();
  auto delay = config.backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + config.url + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::EndpointError, config.url + " returned invalid JSON: " + e.what());
      }
    }
    last_error = config.url + " answered HTTP " + std::to_string(res->status);
    if (!transient(res->status)) throw Error(Errc::EndpointError, last_error + ": " + res->body);
  }
  throw Error(Errc::EndpointError,
              last_error + " (after " + std::to_string(config.max_retries) + " retries)");
}

}  // namespace ookgate::detail
