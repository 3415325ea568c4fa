#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/instance.hpp"
#include "legoabsa/json_io.hpp"

namespace legoabsa {

struct GenerationParams {
  int max_new_tokens = 128;
  int num_beams = 1;
  std::vector<std::string> stop_sequences;
  // Passed through to the server untouched.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const GenerationParams&) const = default;
};

inline void validate(const GenerationParams& p) {
  if (p.max_new_tokens <= 0) throw Error(ErrorCode::InvalidValue, "max_new_tokens must be > 0");
  if (p.num_beams < 1) throw Error(ErrorCode::InvalidValue, "num_beams must be >= 1");
}

inline nlohmann::json to_json(const GenerationParams& p) {
  nlohmann::json j = p.extra.is_object() ? p.extra : nlohmann::json::object();
  j["max_new_tokens"] = p.max_new_tokens;
  j["num_beams"] = p.num_beams;
  if (!p.stop_sequences.empty()) j["stop_sequences"] = p.stop_sequences;
  return j;
}

inline GenerationParams generation_params_from_json(const nlohmann::json& j) {
  GenerationParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_new_tokens") {
      p.max_new_tokens = value.get<int>();
    } else if (key == "num_beams") {
      p.num_beams = value.get<int>();
    } else if (key == "stop_sequences") {
      p.stop_sequences = value.get<std::vector<std::string>>();
    } else {
      p.extra[key] = value;
    }
  }
  validate(p);
  return p;
}

/// Text-generation contract: outputs are index-aligned with the prompts, and
/// a failure never yields partial results. Implementations must tolerate
/// concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::vector<std::string> generate(std::span<const std::string> prompts,
                                            const GenerationParams& params) = 0;

  virtual std::string describe() const = 0;

 protected:
  static void require_prompts(std::span<const std::string> prompts) {
    if (prompts.empty()) throw Error(ErrorCode::InvalidValue, "empty prompt list");
  }
};

/// Returns a fixed output (empty by default) for every prompt.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::string output = {}) : output_(std::move(output)) {}

  std::vector<std::string> generate(std::span<const std::string> prompts,
                                    const GenerationParams&) override {
    require_prompts(prompts);
    return std::vector<std::string>(prompts.size(), output_);
  }

  std::string describe() const override { return "mock"; }

 private:
  std::string output_;
};

/// Looks every prompt up in a fixed map. Unmapped prompts yield "" unless strict.
class GoldenBackend : public Backend {
 public:
  GoldenBackend(std::map<std::string, std::string> answers, bool strict)
      : answers_(std::move(answers)), strict_(strict) {}

  // Accepts a JSON object {prompt: output} or JSONL rows {"prompt", "output"}.
  static GoldenBackend from_file(const std::string& path, bool strict) {
    std::map<std::string, std::string> answers;
    std::string content = read_file(path);
    auto parsed = nlohmann::json::parse(content, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object() && !parsed.contains("prompt")) {
      for (const auto& [k, v] : parsed.items()) answers[k] = v.get<std::string>();
    } else {
      for_each_jsonl(path, [&](const nlohmann::json& j) {
        answers[j.at("prompt").get<std::string>()] = j.at("output").get<std::string>();
      });
    }
    return GoldenBackend(std::move(answers), strict);
  }

  std::vector<std::string> generate(std::span<const std::string> prompts,
                                    const GenerationParams&) override {
    require_prompts(prompts);
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      auto it = answers_.find(prompts[i]);
      if (it != answers_.end()) {
        out.push_back(it->second);
      } else if (strict_) {
        throw BackendError(ErrorCode::BackendUnavailable, "no golden answer for prompt #" +
                                                              std::to_string(i),
                           i, i + 1);
      } else {
        out.emplace_back();
      }
    }
    return out;
  }

  std::string describe() const override { return strict_ ? "golden(strict)" : "golden"; }

 private:
  std::map<std::string, std::string> answers_;
  bool strict_;
};

/// Emits each instance's gold answer for its prompt. When two instances share
/// a prompt, the first one's answer wins.
class OracleBackend : public Backend {
 public:
  explicit OracleBackend(const std::vector<TaskInstance>& instances) {
    for (const auto& inst : instances) answers_.emplace(inst.prompt, inst.gold_answer);
  }

  std::vector<std::string> generate(std::span<const std::string> prompts,
                                    const GenerationParams&) override {
    require_prompts(prompts);
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      auto it = answers_.find(prompts[i]);
      if (it == answers_.end()) {
        throw BackendError(ErrorCode::BackendUnavailable,
                           "oracle has no instance for prompt #" + std::to_string(i), i, i + 1);
      }
      out.push_back(it->second);
    }
    return out;
  }

  std::string describe() const override { return "oracle"; }

 private:
  std::map<std::string, std::string> answers_;
};

/// Splits the prompt list into chunks and calls the backend per chunk. By the
/// contract the concatenation equals a single call.
inline std::vector<std::string> generate_chunked(Backend& backend,
                                                 const std::vector<std::string>& prompts,
                                                 const GenerationParams& params,
                                                 std::size_t chunk_size) {
  std::vector<std::string> out;
  if (prompts.empty()) return out;
  if (chunk_size == 0) chunk_size = prompts.size();
  out.reserve(prompts.size());
  std::span<const std::string> all(prompts);
  for (std::size_t begin = 0; begin < prompts.size(); begin += chunk_size) {
    auto part = all.subspan(begin, std::min(chunk_size, prompts.size() - begin));
    auto got = backend.generate(part, params);
    if (got.size() != part.size()) {
      throw BackendError(ErrorCode::BackendProtocolError, "backend returned " +
                                                              std::to_string(got.size()) +
                                                              " outputs for " +
                                                              std::to_string(part.size()),
                         begin, begin + part.size());
    }
    for (auto& s : got) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace legoabsa
