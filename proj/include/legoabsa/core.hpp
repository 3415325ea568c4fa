#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "legoabsa/error.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

/// Sentinel aspect value for an implicit (unmentioned) aspect.
inline constexpr std::string_view kNullAspect = "NULL";

enum class Polarity { positive, negative, neutral };

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
  }
  return "neutral";
}

inline std::optional<Polarity> try_parse_polarity(std::string_view s) {
  std::string v = text::fold_case(text::trim(s));
  if (v == "positive" || v == "pos") return Polarity::positive;
  if (v == "negative" || v == "neg") return Polarity::negative;
  if (v == "neutral" || v == "neu") return Polarity::neutral;
  return std::nullopt;
}

// Accepts the full words and the POS/NEG/NEU aliases, case-insensitively.
inline Polarity parse_polarity(std::string_view s) {
  if (auto p = try_parse_polarity(s)) return *p;
  throw Error(ErrorCode::InvalidValue, "not a polarity: '" + std::string(s) + "'");
}

// Declaration order is the canonical serialization order.
enum class ElementKind { aspect = 0, opinion = 1, category = 2, polarity = 3 };

inline constexpr std::array<ElementKind, 4> kAllKinds = {
    ElementKind::aspect, ElementKind::opinion, ElementKind::category, ElementKind::polarity};

inline std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::aspect: return "aspect";
    case ElementKind::opinion: return "opinion";
    case ElementKind::category: return "category";
    case ElementKind::polarity: return "polarity";
  }
  return "aspect";
}

inline ElementKind parse_element_kind(std::string_view s) {
  for (auto k : kAllKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidValue, "not an element kind: '" + std::string(s) + "'");
}

inline bool is_text_kind(ElementKind k) { return k != ElementKind::polarity; }

/// One extracted sentiment unit. Absent members are simply not part of the task.
struct SentimentTuple {
  std::optional<std::string> aspect;
  std::optional<std::string> opinion;
  std::optional<std::string> category;
  std::optional<Polarity> polarity;

  auto operator<=>(const SentimentTuple&) const = default;
  bool operator==(const SentimentTuple&) const = default;

  bool has(ElementKind k) const {
    switch (k) {
      case ElementKind::aspect: return aspect.has_value();
      case ElementKind::opinion: return opinion.has_value();
      case ElementKind::category: return category.has_value();
      case ElementKind::polarity: return polarity.has_value();
    }
    return false;
  }

  // Polarity is rendered as its full word.
  std::optional<std::string> value(ElementKind k) const {
    switch (k) {
      case ElementKind::aspect: return aspect;
      case ElementKind::opinion: return opinion;
      case ElementKind::category: return category;
      case ElementKind::polarity:
        if (polarity) return std::string(to_string(*polarity));
        return std::nullopt;
    }
    return std::nullopt;
  }

  // Throws InvalidValue for an unparseable polarity.
  void set(ElementKind k, std::string v) {
    switch (k) {
      case ElementKind::aspect: aspect = std::move(v); break;
      case ElementKind::opinion: opinion = std::move(v); break;
      case ElementKind::category: category = std::move(v); break;
      case ElementKind::polarity: polarity = parse_polarity(v); break;
    }
  }

  std::vector<ElementKind> kinds() const {
    std::vector<ElementKind> out;
    for (auto k : kAllKinds) {
      if (has(k)) out.push_back(k);
    }
    return out;
  }

  bool implicit_aspect() const { return aspect && *aspect == kNullAspect; }
};

inline std::string to_string(const SentimentTuple& t);

enum class Tier { single, basic, advance };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::single: return "single";
    case Tier::basic: return "basic";
    case Tier::advance: return "advance";
  }
  return "single";
}

inline Tier tier_for_arity(std::size_t n) {
  if (n <= 1) return Tier::single;
  if (n == 2) return Tier::basic;
  return Tier::advance;
}

/// A task: an ordered, duplicate-free set of element kinds plus a name.
class TaskSignature {
 public:
  TaskSignature() = default;

  // Sorts and deduplicates `kinds`; throws InvalidValue when empty.
  TaskSignature(std::string name, std::vector<ElementKind> kinds)
      : name_(std::move(name)), kinds_(std::move(kinds)) {
    std::sort(kinds_.begin(), kinds_.end());
    kinds_.erase(std::unique(kinds_.begin(), kinds_.end()), kinds_.end());
    if (kinds_.empty()) {
      throw Error(ErrorCode::InvalidValue, "task signature '" + name_ + "' has no element kinds");
    }
  }

  const std::string& name() const { return name_; }
  const std::vector<ElementKind>& kinds() const { return kinds_; }
  std::size_t arity() const { return kinds_.size(); }
  Tier tier() const { return tier_for_arity(kinds_.size()); }

  bool contains(ElementKind k) const {
    return std::binary_search(kinds_.begin(), kinds_.end(), k);
  }

  // Position of `k` within the signature; the sentinel slot index.
  std::optional<std::size_t> slot_of(ElementKind k) const {
    auto it = std::lower_bound(kinds_.begin(), kinds_.end(), k);
    if (it == kinds_.end() || *it != k) return std::nullopt;
    return static_cast<std::size_t>(it - kinds_.begin());
  }

  bool matches(const SentimentTuple& t) const { return t.kinds() == kinds_; }

  bool operator==(const TaskSignature&) const = default;

 private:
  std::string name_;
  std::vector<ElementKind> kinds_;
};

inline const std::vector<TaskSignature>& task_registry() {
  using K = ElementKind;
  static const std::vector<TaskSignature> registry = {
      TaskSignature("ATE", {K::aspect}),
      TaskSignature("OTE", {K::opinion}),
      TaskSignature("ACD", {K::category}),
      TaskSignature("AOPE", {K::aspect, K::opinion}),
      TaskSignature("UABSA", {K::aspect, K::polarity}),
      TaskSignature("ACSA", {K::category, K::polarity}),
      TaskSignature("ASTE", {K::aspect, K::opinion, K::polarity}),
      TaskSignature("TASD", {K::aspect, K::category, K::polarity}),
      TaskSignature("ACOS", {K::aspect, K::opinion, K::category, K::polarity}),
  };
  return registry;
}

inline std::optional<TaskSignature> find_signature(std::string_view name) {
  for (const auto& s : task_registry()) {
    if (s.name() == name) return s;
  }
  return std::nullopt;
}

inline TaskSignature signature_by_name(std::string_view name) {
  if (auto s = find_signature(name)) return *s;
  throw Error(ErrorCode::UnknownSignature, "no registered task named '" + std::string(name) + "'");
}

inline std::optional<TaskSignature> find_signature_by_kinds(std::vector<ElementKind> kinds) {
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  for (const auto& s : task_registry()) {
    if (s.kinds() == kinds) return s;
  }
  return std::nullopt;
}

/// Keeps exactly the signature's kinds, copied verbatim.
inline SentimentTuple project(const SentimentTuple& t, const TaskSignature& signature) {
  SentimentTuple out;
  for (auto k : signature.kinds()) {
    if (!t.has(k)) {
      throw Error(ErrorCode::MissingElement, "tuple " + to_string(t) + " has no " +
                                                 std::string(to_string(k)) + " for task " +
                                                 signature.name());
    }
  }
  if (signature.contains(ElementKind::aspect)) out.aspect = t.aspect;
  if (signature.contains(ElementKind::opinion)) out.opinion = t.opinion;
  if (signature.contains(ElementKind::category)) out.category = t.category;
  if (signature.contains(ElementKind::polarity)) out.polarity = t.polarity;
  return out;
}

// Removes repeats, keeping first occurrences in order.
inline std::vector<SentimentTuple> dedup_tuples(const std::vector<SentimentTuple>& tuples) {
  std::vector<SentimentTuple> out;
  std::set<SentimentTuple> seen;
  for (const auto& t : tuples) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

enum class Split { train, validation, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

inline std::optional<Split> try_parse_split(std::string_view s) {
  std::string v = text::fold_case(s);
  if (v == "train") return Split::train;
  if (v == "validation" || v == "valid" || v == "dev" || v == "val") return Split::validation;
  if (v == "test") return Split::test;
  return std::nullopt;
}

inline Split parse_split(std::string_view s) {
  if (auto v = try_parse_split(s)) return *v;
  throw Error(ErrorCode::InvalidValue, "not a split: '" + std::string(s) + "'");
}

struct Record {
  std::string id;
  std::string text;
  std::vector<SentimentTuple> gold;
  Split split = Split::train;

  bool operator==(const Record&) const = default;
};

using Dataset = std::vector<Record>;

struct Violation {
  std::size_t tuple_index = 0;
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

inline std::string to_string(const Violation& v) {
  return v.rule + " @" + std::to_string(v.tuple_index) + " (" + v.field + ")";
}

/// Checks tuple well-formedness and span grounding. An empty result means valid.
inline std::vector<Violation> validate_record(const Record& record) {
  std::vector<Violation> out;
  const std::string haystack = text::collapse_whitespace(record.text);
  for (std::size_t i = 0; i < record.gold.size(); ++i) {
    const auto& t = record.gold[i];
    if (t.kinds().empty()) {
      out.push_back({i, "tuple", "empty-tuple"});
      continue;
    }
    for (auto k : {ElementKind::aspect, ElementKind::opinion, ElementKind::category}) {
      auto v = t.value(k);
      if (!v) continue;
      std::string field(to_string(k));
      if (text::trim(*v).empty()) {
        out.push_back({i, field, "empty-field"});
        continue;
      }
      if (*v == kNullAspect) {
        if (k != ElementKind::aspect) out.push_back({i, field, "NULL-only-valid-for-aspect"});
        continue;
      }
      if (k == ElementKind::category) continue;
      if (haystack.find(text::collapse_whitespace(*v)) == std::string::npos) {
        out.push_back({i, field, field + "-not-in-text"});
      }
    }
  }
  return out;
}

inline std::string to_string(const SentimentTuple& t) {
  std::vector<std::string> parts;
  for (auto k : kAllKinds) {
    if (auto v = t.value(k)) parts.push_back(*v);
  }
  return "(" + text::join(parts, ", ") + ")";
}

}  // namespace legoabsa
