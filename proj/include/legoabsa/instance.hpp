#pragma once

#include <optional>
#include <string>
#include <vector>

#include "legoabsa/codecs.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/prompts.hpp"

namespace legoabsa {

/// A record rendered for one task under a chosen prompt style and answer format.
/// Supplementary (non-ABSA) instances carry no signature and no gold tuples.
struct TaskInstance {
  std::string record_id;
  std::string text;
  std::string task;
  std::optional<TaskSignature> signature;
  PromptStyle style = PromptStyle::lego_mask;
  AnswerFormat format = AnswerFormat::gas_extraction;
  std::string prompt;
  std::string gold_answer;
  std::vector<SentimentTuple> gold_tuples;

  bool operator==(const TaskInstance&) const = default;
};

/// Projects the record's gold set onto the signature and renders prompt and answer.
inline TaskInstance make_instance(const Record& record, const TaskSignature& signature,
                                  PromptStyle style, AnswerFormat format,
                                  const PromptTemplates& templates) {
  TaskInstance inst;
  inst.record_id = record.id;
  inst.text = record.text;
  inst.task = signature.name();
  inst.signature = signature;
  inst.style = style;
  inst.format = format;
  std::vector<SentimentTuple> projected;
  for (const auto& t : record.gold) {
    try {
      projected.push_back(project(t, signature));
    } catch (const Error& e) {
      throw Error(e.code, "record " + record.id + ": " + e.reason);
    }
  }
  inst.gold_tuples = dedup_tuples(projected);
  inst.prompt = build_prompt(record.text, signature, style, templates);
  inst.gold_answer = encode(format, inst.gold_tuples, signature, record.text);
  return inst;
}

inline std::vector<TaskInstance> make_instances(const Dataset& dataset,
                                                const TaskSignature& signature, PromptStyle style,
                                                AnswerFormat format,
                                                const PromptTemplates& templates) {
  std::vector<TaskInstance> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset) out.push_back(make_instance(r, signature, style, format, templates));
  return out;
}

}  // namespace legoabsa
