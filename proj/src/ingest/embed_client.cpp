#include <cmath>

#include "http.hpp"
#include "ookgate/error.hpp"

namespace ookgate {

std::vector<Embedding> embed_texts(const EndpointConfig& config, std::span<const std::string> texts) {
  if (texts.empty()) throw Error(Errc::InvalidArgument, "no texts to embed");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw Error(Errc::EmptyText, "text " + std::to_string(i) + " is empty");
  }
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  const std::size_t n_batches = (texts.size() + batch - 1) / batch;
  std::vector<Embedding> out(texts.size());

  detail::bounded_for(n_batches, config.max_in_flight, [&](std::size_t b) {
    const std::size_t first = b * batch;
    const std::size_t last = std::min(first + batch, texts.size());
    nlohmann::json body;
    body["input"] = std::vector<std::string>(texts.begin() + first, texts.begin() + last);
    body["model"] = config.model;
    const auto reply = detail::post_json(config, body);

    try {
      const auto& data = reply.at("data");
      if (!data.is_array() || data.size() != last - first) {
        throw Error(Errc::EndpointError, "expected " + std::to_string(last - first) +
                                             " embeddings in batch " + std::to_string(b));
      }
      std::vector<bool> filled(last - first, false);
      for (std::size_t pos = 0; pos < data.size(); ++pos) {
        const auto& item = data[pos];
        const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : pos;
        if (idx >= filled.size() || filled[idx]) {
          throw Error(Errc::EndpointError, "bad or repeated index in batch " + std::to_string(b));
        }
        filled[idx] = true;
        auto v = item.at("embedding").get<std::vector<double>>();
        Embedding e(v.size());
        for (std::size_t d = 0; d < v.size(); ++d) e[d] = static_cast<float>(v[d]);
        out[first + idx] = std::move(e);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::EndpointError, std::string("malformed embeddings reply: ") + e.what());
    }
  });

  const std::size_t dim = out.front().size();
  if (dim == 0) throw Error(Errc::EndpointError, "endpoint returned an empty embedding");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() != dim) {
      throw Error(Errc::DimensionDrift, "embedding " + std::to_string(i) + " has dimension " +
                                            std::to_string(out[i].size()) + ", expected " +
                                            std::to_string(dim));
    }
  }
  return out;
}

std::string chat_complete(const EndpointConfig& config, std::span<const ChatMessage> messages,
                          std::optional<std::uint64_t> seed) {
  nlohmann::json body;
  body["model"] = config.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = config.temperature;
  if (seed) body["seed"] = *seed;
  const auto reply = detail::post_json(config, body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::EndpointError, std::string("malformed chat reply: ") + e.what());
  }
}

}  // namespace ookgate
