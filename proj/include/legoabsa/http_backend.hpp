#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "legoabsa/backend.hpp"
#include "legoabsa/error.hpp"

namespace legoabsa {

/// Environment variable that overrides the configured HTTP endpoint.
inline constexpr const char* kEndpointEnvVar = "LEGOABSA_ENDPOINT";

struct HttpOptions {
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{60};
  std::function<void(const std::string&)> log = [](const std::string& msg) {
    std::cerr << "[http] " << msg << "\n";
  };
};

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // defaults to /generate
};

inline Endpoint parse_endpoint(std::string_view url) {
  std::string s(text::trim(url));
  if (s.find("://") == std::string::npos) s = "http://" + s;
  std::size_t host_start = s.find("://") + 3;
  std::size_t slash = s.find('/', host_start);
  Endpoint e;
  e.base = s.substr(0, slash);
  e.path = slash == std::string::npos ? "" : s.substr(slash);
  if (e.path.empty() || e.path == "/") e.path = "/generate";
  if (host_start == e.base.size()) throw Error(ErrorCode::InvalidValue, "endpoint has no host");
  return e;
}

/// POST {"inputs": [...], "parameters": {...}} -> {"outputs": [...]}.
///
/// Prompts are sent in chunks of `batch_size`, at most `max_in_flight` at a time.
/// Connection failures and 5xx responses are retried with exponential backoff;
/// anything else is a protocol error. Output order always matches input order.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string endpoint, HttpOptions options = {})
      : endpoint_(parse_endpoint(endpoint)), options_(std::move(options)) {
    if (options_.batch_size == 0) options_.batch_size = 1;
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  }

  static nlohmann::json request_body(std::span<const std::string> prompts,
                                     const GenerationParams& params) {
    return {{"inputs", std::vector<std::string>(prompts.begin(), prompts.end())},
            {"parameters", to_json(params)}};
  }

  std::vector<std::string> generate(std::span<const std::string> prompts,
                                    const GenerationParams& params) override {
    require_prompts(prompts);
    const std::size_t chunks = (prompts.size() + options_.batch_size - 1) / options_.batch_size;
    std::vector<std::vector<std::string>> results(chunks);
    std::vector<std::optional<BackendError>> errors(chunks);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
      httplib::Client client(endpoint_.base);
      client.set_connection_timeout(options_.timeout);
      client.set_read_timeout(options_.timeout);
      client.set_write_timeout(options_.timeout);
      for (std::size_t c = next++; c < chunks; c = next++) {
        std::size_t begin = c * options_.batch_size;
        std::size_t end = std::min(prompts.size(), begin + options_.batch_size);
        try {
          results[c] = post_chunk(client, prompts.subspan(begin, end - begin), params, begin);
        } catch (const BackendError& e) {
          errors[c] = e;
        }
      }
    };

    std::size_t workers = std::min(options_.max_in_flight, chunks);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (auto& e : errors) {
      if (e) throw *e;
    }
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (auto& r : results) {
      for (auto& s : r) out.push_back(std::move(s));
    }
    return out;
  }

  std::string describe() const override { return "http:" + endpoint_.base + endpoint_.path; }

  std::size_t retries_performed() const { return retries_.load(); }

 private:
  std::vector<std::string> post_chunk(httplib::Client& client, std::span<const std::string> chunk,
                                      const GenerationParams& params, std::size_t begin) {
    const std::size_t end = begin + chunk.size();
    const std::string body = request_body(chunk, params).dump();
    std::string last_failure;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        retries_++;
        if (options_.log) {
          options_.log("retry " + std::to_string(attempt) + "/" +
                       std::to_string(options_.max_retries) + " for prompts " +
                       std::to_string(begin) + ".." + std::to_string(end) + " after " +
                       last_failure);
        }
        std::this_thread::sleep_for(options_.initial_backoff * (1 << (attempt - 1)));
      }
      auto res = client.Post(endpoint_.path, body, "application/json");
      if (!res) {
        last_failure = "connection error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_failure = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw BackendError(ErrorCode::BackendProtocolError,
                           "HTTP " + std::to_string(res->status) + " from " + describe(), begin,
                           end);
      }
      return parse_response(res->body, chunk.size(), begin, end);
    }
    throw BackendError(ErrorCode::BackendUnavailable,
                       "giving up after " + std::to_string(options_.max_retries) +
                           " retries: " + last_failure,
                       begin, end);
  }

  static std::vector<std::string> parse_response(const std::string& body, std::size_t expected,
                                                 std::size_t begin, std::size_t end) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("outputs") || !j["outputs"].is_array()) {
      throw BackendError(ErrorCode::BackendProtocolError, "malformed response body", begin, end);
    }
    const auto& outputs = j["outputs"];
    if (outputs.size() != expected) {
      throw BackendError(ErrorCode::BackendProtocolError,
                         "length mismatch: " + std::to_string(outputs.size()) + " outputs for " +
                             std::to_string(expected) + " inputs",
                         begin, end);
    }
    std::vector<std::string> out;
    out.reserve(expected);
    for (const auto& o : outputs) {
      if (!o.is_string()) {
        throw BackendError(ErrorCode::BackendProtocolError, "non-string output", begin, end);
      }
      out.push_back(o.get<std::string>());
    }
    return out;
  }

  Endpoint endpoint_;
  HttpOptions options_;
  std::atomic<std::size_t> retries_{0};
};

}  // namespace legoabsa
