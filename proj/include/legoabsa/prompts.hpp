#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "legoabsa/codecs.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

enum class PromptStyle { lego_mask, prefix_instruction, one_token };

inline constexpr std::array<PromptStyle, 3> kAllStyles = {
    PromptStyle::lego_mask, PromptStyle::prefix_instruction, PromptStyle::one_token};

inline std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::lego_mask: return "lego_mask";
    case PromptStyle::prefix_instruction: return "prefix_instruction";
    case PromptStyle::one_token: return "one_token";
  }
  return "lego_mask";
}

inline PromptStyle parse_prompt_style(std::string_view s) {
  if (s == "lego_mask" || s == "lego") return PromptStyle::lego_mask;
  if (s == "prefix_instruction" || s == "prefix") return PromptStyle::prefix_instruction;
  if (s == "one_token") return PromptStyle::one_token;
  throw Error(ErrorCode::UnknownStyle, "unknown prompt style '" + std::string(s) + "'");
}

inline constexpr std::string_view kSlotMarker = "{slot}";

struct SubPrompt {
  ElementKind kind;
  std::string template_text;  // contains kSlotMarker exactly once
};

// Replaces "{name}" placeholders in one pass; substituted values are not rescanned
// and unknown placeholders are left as they are.
inline std::string render_template(std::string_view tmpl,
                                   const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t at = hay.find(needle); at != std::string_view::npos;
       at = hay.find(needle, at + needle.size())) {
    ++n;
  }
  return n;
}

/// Template registry. Every wording is configuration; `defaults()` is the shipped set.
struct PromptTemplates {
  std::map<ElementKind, std::string> sub_prompts;
  std::map<ElementKind, std::string> element_phrases;
  std::map<ElementKind, std::string> field_words;
  std::string lego_mask;
  std::string slot_joiner;
  std::string prefix_instruction;
  std::string one_token;
  std::map<std::string, std::string> task_tokens;
  std::map<std::string, std::string> supplementary;

  static PromptTemplates defaults() {
    using K = ElementKind;
    PromptTemplates t;
    t.sub_prompts = {{K::aspect, "aspect : {slot}"},
                     {K::opinion, "opinion : {slot}"},
                     {K::category, "category : {slot}"},
                     {K::polarity, "sentiment : {slot}"}};
    t.element_phrases = {{K::aspect, "aspect terms"},
                         {K::opinion, "opinion terms"},
                         {K::category, "aspect categories"},
                         {K::polarity, "sentiment polarities"}};
    t.field_words = {{K::aspect, "aspect"},
                     {K::opinion, "opinion"},
                     {K::category, "category"},
                     {K::polarity, "sentiment"}};
    t.lego_mask = "{text} | {slots}";
    t.slot_joiner = " , ";
    t.prefix_instruction = "Extract all {elements} as ( {fields} ) separated by ; : {text}";
    t.one_token = "<{token}> {text}";
    for (const auto& s : task_registry()) t.task_tokens[s.name()] = s.name();
    t.supplementary = {
        {"pos_tagging",
         "Tag the part of speech of every token as token_TAG separated by ; : {text}"},
        {"doc_sentiment", "Classify the sentiment of the document as one of {labels} : {text}"},
        {"emotion", "Classify the emotion of the text as one of {labels} : {text}"},
    };
    return t;
  }

  // Throws InvalidValue when a sub-prompt lacks its single slot marker.
  void validate() const {
    for (auto k : kAllKinds) {
      auto it = sub_prompts.find(k);
      if (it == sub_prompts.end()) {
        throw Error(ErrorCode::InvalidValue,
                    "no sub-prompt for element kind " + std::string(to_string(k)));
      }
      if (count_occurrences(it->second, kSlotMarker) != 1) {
        throw Error(ErrorCode::InvalidValue, "sub-prompt for " + std::string(to_string(k)) +
                                                 " must contain {slot} exactly once");
      }
      if (!element_phrases.count(k) || !field_words.count(k)) {
        throw Error(ErrorCode::InvalidValue,
                    "missing phrase or field word for " + std::string(to_string(k)));
      }
    }
  }

  SubPrompt sub_prompt(ElementKind k) const { return {k, sub_prompts.at(k)}; }

  std::string token_for(const TaskSignature& signature) const {
    auto it = task_tokens.find(signature.name());
    return it == task_tokens.end() ? signature.name() : it->second;
  }
};

inline nlohmann::json to_json(const PromptTemplates& t) {
  auto kind_map = [](const std::map<ElementKind, std::string>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
    return j;
  };
  return {
      {"sub_prompts", kind_map(t.sub_prompts)},
      {"element_phrases", kind_map(t.element_phrases)},
      {"field_words", kind_map(t.field_words)},
      {"styles",
       {{"lego_mask", t.lego_mask},
        {"prefix_instruction", t.prefix_instruction},
        {"one_token", t.one_token}}},
      {"slot_joiner", t.slot_joiner},
      {"task_tokens", t.task_tokens},
      {"supplementary", t.supplementary},
  };
}

// Missing keys fall back to the defaults, so a file may override just a few strings.
inline PromptTemplates templates_from_json(const nlohmann::json& j) {
  PromptTemplates t = PromptTemplates::defaults();
  auto read_kind_map = [&](const char* key, std::map<ElementKind, std::string>& out) {
    if (!j.contains(key)) return;
    for (const auto& [k, v] : j.at(key).items()) out[parse_element_kind(k)] = v.get<std::string>();
  };
  try {
    read_kind_map("sub_prompts", t.sub_prompts);
    read_kind_map("element_phrases", t.element_phrases);
    read_kind_map("field_words", t.field_words);
    if (j.contains("styles")) {
      for (const auto& [style, skeleton] : j.at("styles").items()) {
        switch (parse_prompt_style(style)) {
          case PromptStyle::lego_mask: t.lego_mask = skeleton.get<std::string>(); break;
          case PromptStyle::prefix_instruction:
            t.prefix_instruction = skeleton.get<std::string>();
            break;
          case PromptStyle::one_token: t.one_token = skeleton.get<std::string>(); break;
        }
      }
    }
    if (j.contains("slot_joiner")) t.slot_joiner = j.at("slot_joiner").get<std::string>();
    if (j.contains("task_tokens")) {
      for (const auto& [task, token] : j.at("task_tokens").items()) {
        t.task_tokens[task] = token.get<std::string>();
      }
    }
    if (j.contains("supplementary")) {
      for (const auto& [kind, tmpl] : j.at("supplementary").items()) {
        t.supplementary[kind] = tmpl.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("template registry: ") + e.what());
  }
  t.validate();
  return t;
}

namespace detail {

inline std::string phrase_list(const std::vector<std::string>& items) {
  if (items.size() <= 1) return items.empty() ? std::string() : items[0];
  std::vector<std::string> head(items.begin(), items.end() - 1);
  return text::join(head, ", ") + " and " + items.back();
}

// A registered name must carry its registered kinds.
inline void check_signature(const TaskSignature& signature) {
  if (signature.name().empty()) {
    throw Error(ErrorCode::UnknownSignature, "task signature has no name");
  }
  if (auto reg = find_signature(signature.name()); reg && reg->kinds() != signature.kinds()) {
    throw Error(ErrorCode::UnknownSignature,
                "'" + signature.name() + "' does not match the registered element kinds");
  }
}

}  // namespace detail

/// Renders the signature's sub-prompts with sentinel slots in canonical order.
inline std::string lego_slots(const TaskSignature& signature, const PromptTemplates& templates) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < signature.arity(); ++i) {
    parts.push_back(render_template(templates.sub_prompts.at(signature.kinds()[i]),
                                    {{"slot", detail::sentinel(i)}}));
  }
  return text::join(parts, templates.slot_joiner);
}

inline std::string build_prompt(std::string_view input_text, const TaskSignature& signature,
                                PromptStyle style,
                                const PromptTemplates& templates = PromptTemplates::defaults()) {
  detail::check_signature(signature);
  if (text::trim(input_text).empty()) {
    throw Error(ErrorCode::InvalidValue, "cannot build a prompt for empty text");
  }
  std::string body(input_text);
  switch (style) {
    case PromptStyle::lego_mask:
      return render_template(templates.lego_mask,
                             {{"text", body}, {"slots", lego_slots(signature, templates)}});
    case PromptStyle::prefix_instruction: {
      std::vector<std::string> phrases;
      std::vector<std::string> fields;
      for (auto k : signature.kinds()) {
        phrases.push_back(templates.element_phrases.at(k));
        fields.push_back(templates.field_words.at(k));
      }
      return render_template(templates.prefix_instruction,
                             {{"elements", detail::phrase_list(phrases)},
                              {"fields", text::join(fields, " , ")},
                              {"text", body}});
    }
    case PromptStyle::one_token:
      return render_template(templates.one_token,
                             {{"token", templates.token_for(signature)}, {"text", body}});
  }
  throw Error(ErrorCode::UnknownStyle, "unhandled prompt style");
}

/// Name for a kind set with no registry entry, e.g. "ASPECT+OPINION+CATEGORY".
inline std::string composite_name(const std::vector<ElementKind>& kinds) {
  std::vector<std::string> parts;
  for (auto k : kinds) {
    std::string n(to_string(k));
    for (char& c : n) c = static_cast<char>(c - 'a' + 'A');
    parts.push_back(n);
  }
  return text::join(parts, "+");
}

/// Union of two tasks' element kinds, named by registry lookup when possible.
inline TaskSignature assemble_signature(const TaskSignature& a, const TaskSignature& b) {
  std::vector<ElementKind> kinds = a.kinds();
  kinds.insert(kinds.end(), b.kinds().begin(), b.kinds().end());
  TaskSignature merged("", kinds);
  if (auto reg = find_signature_by_kinds(merged.kinds())) return *reg;
  return TaskSignature(composite_name(merged.kinds()), merged.kinds());
}

}  // namespace legoabsa
