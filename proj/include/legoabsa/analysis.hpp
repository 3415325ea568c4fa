#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/eval.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

// Machine-checkable approximations of the manual error categories. Each tag
// names the manual category it hints at; it does not claim to be that category.
enum class ErrorTag { PARTIAL_SPAN, NEAR_MISS_TYPO, NULL_ASPECT, UNMATCHED };

inline constexpr std::array<ErrorTag, 4> kAllTags = {ErrorTag::PARTIAL_SPAN, ErrorTag::NEAR_MISS_TYPO,
                                                     ErrorTag::NULL_ASPECT, ErrorTag::UNMATCHED};

inline std::string_view to_string(ErrorTag t) {
  switch (t) {
    case ErrorTag::PARTIAL_SPAN: return "PARTIAL_SPAN";
    case ErrorTag::NEAR_MISS_TYPO: return "NEAR_MISS_TYPO";
    case ErrorTag::NULL_ASPECT: return "NULL_ASPECT";
    case ErrorTag::UNMATCHED: return "UNMATCHED";
  }
  return "UNMATCHED";
}

inline std::string_view category_hint(ErrorTag t) {
  switch (t) {
    case ErrorTag::PARTIAL_SPAN: return "INCOMPLETE";
    case ErrorTag::NEAR_MISS_TYPO: return "TYPO";
    case ErrorTag::NULL_ASPECT: return "IMPLICIT";
    case ErrorTag::UNMATCHED: return "UNDERPERFORM/other";
  }
  return "";
}

/// Manual categories left for a human reviewer.
inline const std::vector<std::string>& manual_categories() {
  static const std::vector<std::string> v = {"ANNOTATION",         "POS_CONFUSE", "SERIES",
                                             "SENTENCE_STRUCTURE", "COREFERENCE", "TRAIN_DATA"};
  return v;
}

namespace detail {

// Text kinds on which two same-shaped tuples differ, or nullopt when the
// shapes or polarities differ.
inline std::optional<std::vector<ElementKind>> differing_text_fields(const SentimentTuple& a,
                                                                     const SentimentTuple& b) {
  if (a.kinds() != b.kinds() || a.polarity != b.polarity) return std::nullopt;
  std::vector<ElementKind> diff;
  for (auto k : {ElementKind::aspect, ElementKind::opinion, ElementKind::category}) {
    if (a.value(k) != b.value(k)) diff.push_back(k);
  }
  return diff;
}

inline std::size_t text_field_count(const SentimentTuple& t) {
  std::size_t n = 0;
  for (auto k : {ElementKind::aspect, ElementKind::opinion, ElementKind::category}) n += t.has(k);
  return n;
}

// True when one token list is a strict prefix or strict suffix of the other.
inline bool is_token_extension(std::string_view a, std::string_view b) {
  auto x = text::split_whitespace(a);
  auto y = text::split_whitespace(b);
  if (x.size() == y.size()) return false;
  const auto& shorter = x.size() < y.size() ? x : y;
  const auto& longer = x.size() < y.size() ? y : x;
  if (shorter.empty()) return false;
  bool prefix = std::equal(shorter.begin(), shorter.end(), longer.begin());
  bool suffix = std::equal(shorter.rbegin(), shorter.rend(), longer.rbegin());
  return prefix || suffix;
}

inline std::size_t typo_budget(std::string_view a, std::string_view b) {
  std::size_t len = std::max(text::length_in_code_points(a), text::length_in_code_points(b));
  auto scaled = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(len)));
  return std::max<std::size_t>(2, scaled);
}

}  // namespace detail

/// Decision order: PARTIAL_SPAN, NEAR_MISS_TYPO, NULL_ASPECT, UNMATCHED.
/// Inputs are canonicalized first. Throws BothAbsent when neither side is given.
inline ErrorTag tag_error(const std::optional<SentimentTuple>& fp,
                          const std::optional<SentimentTuple>& fn,
                          const CanonicalizeOptions& options = {}) {
  if (!fp && !fn) throw Error(ErrorCode::BothAbsent, "tag_error needs a false positive or negative");
  if (fp && fn) {
    auto a = canonicalize(*fp, options);
    auto b = canonicalize(*fn, options);
    auto diff = detail::differing_text_fields(a, b);
    if (diff && diff->size() == 1) {
      auto va = *a.value(diff->front());
      auto vb = *b.value(diff->front());
      if (detail::is_token_extension(va, vb)) return ErrorTag::PARTIAL_SPAN;
      if (text::edit_distance(va, vb) <= detail::typo_budget(va, vb)) {
        return ErrorTag::NEAR_MISS_TYPO;
      }
    }
    if (a.implicit_aspect() || b.implicit_aspect()) return ErrorTag::NULL_ASPECT;
    return ErrorTag::UNMATCHED;
  }
  const auto& lone = fp ? *fp : *fn;
  return lone.implicit_aspect() ? ErrorTag::NULL_ASPECT : ErrorTag::UNMATCHED;
}

struct TriageItem {
  std::string record_id;
  std::string task;
  std::string text;
  std::optional<SentimentTuple> fp;
  std::optional<SentimentTuple> fn;
  ErrorTag tag = ErrorTag::UNMATCHED;
};

struct TriageSummary {
  std::map<ErrorTag, std::size_t> counts;
  std::vector<TriageItem> items;

  std::vector<TriageItem> worksheet() const {
    std::vector<TriageItem> rows;
    std::copy_if(items.begin(), items.end(), std::back_inserter(rows),
                 [](const TriageItem& i) { return i.tag == ErrorTag::UNMATCHED; });
    return rows;
  }
};

namespace detail {

// Pairs share at least one text value, or are single-text-field tuples that
// the typo or span rules can relate.
inline bool pairable(const SentimentTuple& fp, const SentimentTuple& fn) {
  if (fp.kinds() != fn.kinds()) return false;
  for (auto k : {ElementKind::aspect, ElementKind::opinion, ElementKind::category}) {
    if (fp.has(k) && fp.value(k) == fn.value(k)) return true;
  }
  if (text_field_count(fp) == 1) {
    auto tag = tag_error(fp, fn);
    return tag == ErrorTag::PARTIAL_SPAN || tag == ErrorTag::NEAR_MISS_TYPO;
  }
  return false;
}

}  // namespace detail

/// Greedy pairing inside each record: the closest (fp, fn) pair by edit
/// distance of their renderings goes first, ties to the lowest fn index then
/// the lowest fp index. Unpaired tuples become singleton items.
inline std::vector<TriageItem> triage_record(const RecordDetail& d,
                                             const CanonicalizeOptions& options = {}) {
  std::vector<SentimentTuple> fps;
  std::vector<SentimentTuple> fns;
  for (const auto& t : d.false_positives) fps.push_back(canonicalize(t, options));
  for (const auto& t : d.false_negatives) fns.push_back(canonicalize(t, options));

  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> candidates;  // dist, fn, fp
  for (std::size_t j = 0; j < fns.size(); ++j) {
    for (std::size_t i = 0; i < fps.size(); ++i) {
      if (!detail::pairable(fps[i], fns[j])) continue;
      candidates.emplace_back(text::edit_distance(to_string(fps[i]), to_string(fns[j])), j, i);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<bool> fp_used(fps.size(), false);
  std::vector<bool> fn_used(fns.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // fn, fp
  for (const auto& [dist, j, i] : candidates) {
    if (fn_used[j] || fp_used[i]) continue;
    fn_used[j] = fp_used[i] = true;
    pairs.emplace_back(j, i);
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<TriageItem> items;
  auto add = [&](std::optional<SentimentTuple> fp, std::optional<SentimentTuple> fn) {
    TriageItem item{d.record_id, d.task, d.text, std::move(fp), std::move(fn), ErrorTag::UNMATCHED};
    item.tag = tag_error(item.fp, item.fn, options);
    items.push_back(std::move(item));
  };
  for (const auto& [j, i] : pairs) add(fps[i], fns[j]);
  for (std::size_t j = 0; j < fns.size(); ++j) {
    if (!fn_used[j]) add(std::nullopt, fns[j]);
  }
  for (std::size_t i = 0; i < fps.size(); ++i) {
    if (!fp_used[i]) add(fps[i], std::nullopt);
  }
  return items;
}

/// Throws MissingDetail when the report was produced without per-record rows
/// but has tasks with errors.
inline TriageSummary analyze_run(const EvalReport& report, const CanonicalizeOptions& options = {}) {
  if (report.per_record.empty()) {
    for (const auto& [name, t] : report.per_task) {
      if (t.counts.fp + t.counts.fn > 0) {
        throw Error(ErrorCode::MissingDetail, "report lacks per-record rows for task " + name);
      }
    }
  }
  TriageSummary summary;
  for (auto tag : kAllTags) summary.counts[tag] = 0;
  for (const auto& d : report.per_record) {
    for (auto& item : triage_record(d, options)) {
      summary.counts[item.tag]++;
      summary.items.push_back(std::move(item));
    }
  }
  return summary;
}

// ---- output ----

inline json to_json(const TriageItem& item) {
  auto opt = [](const std::optional<SentimentTuple>& t) -> json {
    return t ? json(to_string(*t)) : json(nullptr);
  };
  return {{"record_id", item.record_id},
          {"task", item.task},
          {"text", item.text},
          {"fp", opt(item.fp)},
          {"fn", opt(item.fn)},
          {"tag", to_string(item.tag)},
          {"hint", category_hint(item.tag)}};
}

inline json to_json(const TriageSummary& s) {
  json counts = json::object();
  for (const auto& [tag, n] : s.counts) counts[std::string(to_string(tag))] = n;
  json items = json::array();
  for (const auto& i : s.items) items.push_back(to_json(i));
  return {{"counts", counts}, {"items", items}};
}

inline std::string worksheet_header() {
  return "# Manual triage worksheet\n"
         "#\n"
         "# Each row below was not matched by an automated rule. Assign one or more of:\n"
         "#   " +
         text::join(manual_categories(), ", ") +
         "\n"
         "#\n"
         "# Training-data audit protocol: sample 100 training texts uniformly at random,\n"
         "# mark each as defect-free or not (missing tuple, wrong span, wrong polarity,\n"
         "# sentiment not recoverable from the text), and report the defect-free share.\n"
         "#\n";
}

inline std::string render_worksheet(const TriageSummary& s) {
  std::string out = worksheet_header();
  std::size_t n = 0;
  for (const auto& item : s.worksheet()) {
    out += "\n[" + std::to_string(++n) + "] " + item.record_id + " (" + item.task + ")\n";
    out += "  text : " + item.text + "\n";
    out += "  fp   : " + (item.fp ? to_string(*item.fp) : std::string("-")) + "\n";
    out += "  fn   : " + (item.fn ? to_string(*item.fn) : std::string("-")) + "\n";
    out += "  label: \n";
  }
  return out;
}

}  // namespace legoabsa
