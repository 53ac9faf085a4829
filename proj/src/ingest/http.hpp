#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ookgate/ingest.hpp"

namespace ookgate::detail {

// POST a JSON body to config.url. Connection failures, 429 and 5xx replies
// are retried up to config.max_retries times with exponential backoff; other
// failures throw EndpointError immediately.
nlohmann::json post_json(const EndpointConfig& config, const nlohmann::json& body);

// Runs task(i) for i in [0, n) on at most `workers` threads. Exceptions are
// rethrown after all workers finish, lowest index first.
inline void bounded_for(std::size_t n, std::size_t workers,
                        const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(workers, n));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ookgate::detail
