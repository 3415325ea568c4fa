#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "legoabsa/codecs.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/instance.hpp"
#include "legoabsa/json_io.hpp"
#include "legoabsa/prompts.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

// ---------------------------------------------------------------------------
// Line-format import: "<text>####[('aspect', 'opinion', 'POS'), ...]"
// ---------------------------------------------------------------------------

inline constexpr std::string_view kLineSeparator = "####";

struct SkippedLine {
  std::size_t line = 0;
  std::string reason;
};

struct RecordViolation {
  std::string record_id;
  Violation violation;
};

struct ImportReport {
  std::vector<std::string> files;
  std::vector<SkippedLine> skipped;
  std::vector<RecordViolation> violations;
  std::size_t duplicates_removed = 0;

  bool clean() const { return skipped.empty() && violations.empty(); }
};

struct ImportResult {
  Dataset dataset;
  ImportReport report;
};

namespace detail {

// Cursor over the Python-literal tuple list on the right of "####".
class LiteralReader {
 public:
  explicit LiteralReader(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string quoted() {
    skip_ws();
    if (pos_ >= s_.size() || (s_[pos_] != '\'' && s_[pos_] != '"')) fail("expected quoted term");
    char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        char e = s_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: out.push_back(e); break;
        }
        continue;
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated quoted term");
    ++pos_;
    return out;
  }

  bool at_end() {
    skip_ws();
    return pos_ == s_.size();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedLine, what + " at column " + std::to_string(pos_ + 1));
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::vector<SentimentTuple> parse_triplet_list(std::string_view literal) {
  LiteralReader r(literal);
  std::vector<SentimentTuple> out;
  r.expect('[');
  if (r.consume(']')) {
    if (!r.at_end()) r.fail("trailing characters");
    return out;
  }
  do {
    r.expect('(');
    std::string aspect = r.quoted();
    r.expect(',');
    std::string opinion = r.quoted();
    r.expect(',');
    std::string polarity = r.quoted();
    r.expect(')');
    auto p = try_parse_polarity(polarity);
    if (!p) r.fail("unknown polarity '" + polarity + "'");
    SentimentTuple t;
    t.aspect = std::string(text::trim(aspect));
    t.opinion = std::string(text::trim(opinion));
    t.polarity = *p;
    out.push_back(std::move(t));
  } while (r.consume(','));
  r.expect(']');
  if (!r.at_end()) r.fail("trailing characters");
  return out;
}

}  // namespace detail

/// Guesses the split from a file name ("train", "dev"/"valid", "test").
inline std::optional<Split> split_from_filename(const std::string& path) {
  std::string stem = text::fold_case(std::filesystem::path(path).stem().string());
  if (stem.find("train") != std::string::npos) return Split::train;
  if (stem.find("test") != std::string::npos) return Split::test;
  if (stem.find("dev") != std::string::npos || stem.find("val") != std::string::npos) {
    return Split::validation;
  }
  return std::nullopt;
}

/// Parses line-format content. Malformed lines are skipped and reported; ids are
/// "<id_prefix>-<line number>".
inline ImportResult import_lines(std::string_view content, Split split,
                                 const std::string& id_prefix) {
  ImportResult result;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    std::string_view line = content.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                                : end - start);
    start = end == std::string_view::npos ? content.size() + 1 : end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    std::size_t sep = line.find(kLineSeparator);
    if (sep == std::string_view::npos) {
      result.report.skipped.push_back({lineno, "MalformedLine: missing '####' separator"});
      continue;
    }
    Record rec;
    rec.id = id_prefix + "-" + std::to_string(lineno);
    rec.text = std::string(text::trim(line.substr(0, sep)));
    rec.split = split;
    if (rec.text.empty()) {
      result.report.skipped.push_back({lineno, "MalformedLine: empty text"});
      continue;
    }
    try {
      auto tuples = detail::parse_triplet_list(line.substr(sep + kLineSeparator.size()));
      rec.gold = dedup_tuples(tuples);
      result.report.duplicates_removed += tuples.size() - rec.gold.size();
    } catch (const Error& e) {
      result.report.skipped.push_back({lineno, e.what()});
      continue;
    }
    for (auto& v : validate_record(rec)) result.report.violations.push_back({rec.id, std::move(v)});
    result.dataset.push_back(std::move(rec));
  }
  return result;
}

inline ImportResult import_line_format(const std::string& path, std::optional<Split> split = {}) {
  auto resolved = split ? split : split_from_filename(path);
  if (!resolved) {
    throw Error(ErrorCode::InvalidValue,
                "cannot infer the split of '" + path + "'; name it explicitly (path:split)");
  }
  std::string content = read_file(path);
  auto result = import_lines(content, *resolved, std::filesystem::path(path).stem().string());
  result.report.files.push_back(path);
  return result;
}

inline json to_json(const ImportReport& r) {
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"line", s.line}, {"reason", s.reason}});
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"record_id", v.record_id},
                          {"tuple_index", v.violation.tuple_index},
                          {"field", v.violation.field},
                          {"rule", v.violation.rule}});
  }
  return {{"files", r.files},
          {"skipped_lines", skipped},
          {"violations", violations},
          {"duplicates_removed", r.duplicates_removed}};
}

// ---------------------------------------------------------------------------
// Task derivation
// ---------------------------------------------------------------------------

struct DeriveOptions {
  // Implicit ("NULL") aspects stay in aspect-bearing derivations unless disabled.
  bool keep_null_aspect = true;
};

inline Dataset derive_task(const Dataset& dataset, const TaskSignature& signature,
                           const DeriveOptions& options = {}) {
  Dataset out;
  out.reserve(dataset.size());
  for (const auto& rec : dataset) {
    Record derived{rec.id, rec.text, {}, rec.split};
    std::vector<SentimentTuple> projected;
    for (const auto& t : rec.gold) {
      if (!options.keep_null_aspect && signature.contains(ElementKind::aspect) &&
          t.implicit_aspect()) {
        continue;
      }
      try {
        projected.push_back(project(t, signature));
      } catch (const Error& e) {
        throw Error(e.code, "record " + rec.id + ": " + e.reason);
      }
    }
    derived.gold = dedup_tuples(projected);
    out.push_back(std::move(derived));
  }
  return out;
}

inline Dataset filter_split(const Dataset& dataset, Split split) {
  Dataset out;
  std::copy_if(dataset.begin(), dataset.end(), std::back_inserter(out),
               [&](const Record& r) { return r.split == split; });
  return out;
}

// ---------------------------------------------------------------------------
// Supplementary tasks
// ---------------------------------------------------------------------------

enum class SupplementaryKind { pos_tagging, doc_sentiment, emotion };

inline std::string_view to_string(SupplementaryKind k) {
  switch (k) {
    case SupplementaryKind::pos_tagging: return "pos_tagging";
    case SupplementaryKind::doc_sentiment: return "doc_sentiment";
    case SupplementaryKind::emotion: return "emotion";
  }
  return "pos_tagging";
}

inline SupplementaryKind parse_supplementary_kind(std::string_view s) {
  if (s == "pos_tagging" || s == "pos") return SupplementaryKind::pos_tagging;
  if (s == "doc_sentiment") return SupplementaryKind::doc_sentiment;
  if (s == "emotion") return SupplementaryKind::emotion;
  throw Error(ErrorCode::InvalidValue, "unknown supplementary kind '" + std::string(s) + "'");
}

struct PosRow {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

struct LabeledText {
  std::string text;
  std::string label;
};

using SupplementaryRows = std::variant<std::vector<PosRow>, std::vector<LabeledText>>;

/// Token<TAB>tag per line; a blank line ends a sentence.
inline std::vector<PosRow> read_pos_tsv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<PosRow> rows;
  PosRow current;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) rows.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    auto cols = text::split(line, "\t");
    if (cols.size() != 2 || text::trim(cols[0]).empty() || text::trim(cols[1]).empty()) {
      throw Error(ErrorCode::SchemaMismatch,
                  path + ":" + std::to_string(lineno) + ": expected 'token<TAB>tag'", lineno);
    }
    current.tokens.emplace_back(text::trim(cols[0]));
    current.tags.emplace_back(text::trim(cols[1]));
  }
  flush();
  return rows;
}

/// Text<TAB>label per line.
inline std::vector<LabeledText> read_labeled_tsv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<LabeledText> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos || text::trim(line.substr(0, tab)).empty() ||
        text::trim(line.substr(tab + 1)).empty()) {
      throw Error(ErrorCode::SchemaMismatch,
                  path + ":" + std::to_string(lineno) + ": expected 'text<TAB>label'", lineno);
    }
    rows.push_back({std::string(text::trim(line.substr(0, tab))),
                    std::string(text::trim(line.substr(tab + 1)))});
  }
  return rows;
}

inline std::vector<TaskInstance> adapt_supplementary(
    SupplementaryKind kind, const SupplementaryRows& rows,
    const PromptTemplates& templates = PromptTemplates::defaults()) {
  const std::string name(to_string(kind));
  auto tmpl = templates.supplementary.find(name);
  if (tmpl == templates.supplementary.end()) {
    throw Error(ErrorCode::InvalidValue, "no instruction template for " + name);
  }
  std::vector<TaskInstance> out;
  auto base = [&](std::size_t i, std::string text) {
    TaskInstance inst;
    inst.record_id = name + "-" + std::to_string(i + 1);
    inst.text = std::move(text);
    inst.task = name;
    inst.style = PromptStyle::prefix_instruction;
    return inst;
  };

  if (kind == SupplementaryKind::pos_tagging) {
    const auto* pos = std::get_if<std::vector<PosRow>>(&rows);
    if (!pos) throw Error(ErrorCode::SchemaMismatch, "pos_tagging expects token/tag rows");
    for (std::size_t i = 0; i < pos->size(); ++i) {
      const auto& row = (*pos)[i];
      if (row.tokens.empty() || row.tokens.size() != row.tags.size()) {
        throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(i + 1) + ": " +
                                                   std::to_string(row.tokens.size()) +
                                                   " tokens vs " + std::to_string(row.tags.size()) +
                                                   " tags");
      }
      std::vector<std::string> pairs;
      for (std::size_t k = 0; k < row.tokens.size(); ++k) {
        if (row.tokens[k].empty() || row.tags[k].empty() ||
            text::split_whitespace(row.tokens[k]).size() != 1) {
          throw Error(ErrorCode::SchemaMismatch,
                      "row " + std::to_string(i + 1) + ": bad token or tag at " + std::to_string(k));
        }
        pairs.push_back(row.tokens[k] + "_" + row.tags[k]);
      }
      auto inst = base(i, text::join(row.tokens, " "));
      inst.prompt = render_template(tmpl->second, {{"text", inst.text}});
      inst.gold_answer = text::join(pairs, "; ");
      out.push_back(std::move(inst));
    }
    return out;
  }

  const auto* labeled = std::get_if<std::vector<LabeledText>>(&rows);
  if (!labeled) throw Error(ErrorCode::SchemaMismatch, name + " expects text/label rows");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < labeled->size(); ++i) {
    const auto& row = (*labeled)[i];
    if (text::trim(row.text).empty() || text::trim(row.label).empty()) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(i + 1) + ": empty text or label");
    }
    labels.insert(row.label);
  }
  const std::string label_list = text::join(labels, ", ");
  for (std::size_t i = 0; i < labeled->size(); ++i) {
    auto inst = base(i, (*labeled)[i].text);
    inst.prompt = render_template(tmpl->second, {{"labels", label_list}, {"text", inst.text}});
    inst.gold_answer = (*labeled)[i].label;
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multitask mixing
// ---------------------------------------------------------------------------

enum class MixStrategy { round_robin, proportional };

inline std::string_view to_string(MixStrategy s) {
  return s == MixStrategy::round_robin ? "round_robin" : "proportional";
}

inline MixStrategy parse_mix_strategy(std::string_view s) {
  if (s == "round_robin") return MixStrategy::round_robin;
  if (s == "proportional") return MixStrategy::proportional;
  throw Error(ErrorCode::InvalidValue, "unknown mix strategy '" + std::string(s) + "'");
}

struct MixEntry {
  std::string task;  // signature name or supplementary kind
  double weight = 1.0;
  std::optional<PromptStyle> style;    // falls back to the mix-wide style
  std::optional<AnswerFormat> format;  // falls back to the mix-wide format

  bool operator==(const MixEntry&) const = default;
};

struct MixPlan {
  std::vector<MixEntry> entries;
  std::uint64_t seed = 0;
  MixStrategy strategy = MixStrategy::round_robin;

  bool operator==(const MixPlan&) const = default;
};

/// The named task combinations. Supplementary sources are appended by the caller.
inline const std::map<std::string, std::vector<std::string>>& mix_presets() {
  static const std::map<std::string, std::vector<std::string>> presets = {
      {"basic", {"AOPE", "UABSA"}},
      {"advance", {"ASTE"}},
      {"single+basic", {"ATE", "OTE", "AOPE", "UABSA"}},
      {"single+advance", {"ATE", "OTE", "ASTE"}},
      {"basic+advance", {"AOPE", "UABSA", "ASTE"}},
      {"all", {"ATE", "OTE", "AOPE", "UABSA", "ASTE"}},
  };
  return presets;
}

inline MixPlan preset_plan(const std::string& name, std::uint64_t seed,
                           MixStrategy strategy = MixStrategy::round_robin) {
  auto it = mix_presets().find(name);
  if (it == mix_presets().end()) {
    throw Error(ErrorCode::InvalidValue, "unknown task preset '" + name + "'");
  }
  MixPlan plan;
  plan.seed = seed;
  plan.strategy = strategy;
  for (const auto& task : it->second) plan.entries.push_back({task, 1.0, {}, {}});
  return plan;
}

inline json to_json(const MixPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    json j = {{"task", e.task}, {"weight", e.weight}};
    if (e.style) j["style"] = to_string(*e.style);
    if (e.format) j["format"] = to_string(*e.format);
    entries.push_back(j);
  }
  return {{"entries", entries}, {"seed", plan.seed}, {"strategy", to_string(plan.strategy)}};
}

inline MixPlan mix_plan_from_json(const json& j) {
  MixPlan plan;
  try {
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.strategy = parse_mix_strategy(j.value("strategy", std::string("round_robin")));
    for (const auto& e : j.at("entries")) {
      MixEntry entry;
      entry.task = e.at("task").get<std::string>();
      entry.weight = e.value("weight", 1.0);
      if (e.contains("style")) entry.style = parse_prompt_style(e.at("style").get<std::string>());
      if (e.contains("format")) entry.format = parse_answer_format(e.at("format").get<std::string>());
      plan.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("mix plan: ") + e.what());
  }
  return plan;
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Interleaves task sources into one deterministic stream.
///  round_robin: cycles the entries in plan order, one instance each, skipping
///    exhausted ones.
///  proportional: picks entry i with probability proportional to
///    weight_i * remaining_i (seeded), then takes its next instance in order.
inline std::vector<TaskInstance> mix_multitask(
    const std::vector<std::pair<Dataset, TaskSignature>>& derived, const MixPlan& plan,
    AnswerFormat format, PromptStyle style,
    const PromptTemplates& templates = PromptTemplates::defaults(),
    const std::map<std::string, std::vector<TaskInstance>>& supplementary = {}) {
  std::vector<std::vector<TaskInstance>> sources;
  for (const auto& entry : plan.entries) {
    if (!(entry.weight > 0.0)) {
      throw Error(ErrorCode::InvalidValue, "mix weight for " + entry.task + " must be > 0");
    }
    auto hit = std::find_if(derived.begin(), derived.end(),
                            [&](const auto& d) { return d.second.name() == entry.task; });
    if (hit != derived.end()) {
      sources.push_back(make_instances(hit->first, hit->second, entry.style.value_or(style),
                                       entry.format.value_or(format), templates));
    } else if (auto sup = supplementary.find(entry.task); sup != supplementary.end()) {
      sources.push_back(sup->second);
    } else {
      throw Error(ErrorCode::InvalidValue, "mix entry '" + entry.task + "' has no dataset");
    }
    if (plan.strategy == MixStrategy::round_robin && sources.back().empty()) {
      throw Error(ErrorCode::EmptyEntry, "mix entry '" + entry.task + "' is empty");
    }
  }

  std::size_t total = 0;
  for (const auto& s : sources) total += s.size();
  std::vector<TaskInstance> out;
  out.reserve(total);
  std::vector<std::size_t> next(sources.size(), 0);

  if (plan.strategy == MixStrategy::round_robin) {
    while (out.size() < total) {
      for (std::size_t i = 0; i < sources.size(); ++i) {
        if (next[i] < sources[i].size()) out.push_back(sources[i][next[i]++]);
      }
    }
    return out;
  }

  std::mt19937_64 rng(plan.seed);
  while (out.size() < total) {
    double mass = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      mass += plan.entries[i].weight * static_cast<double>(sources[i].size() - next[i]);
    }
    double u = detail::unit_interval(rng) * mass;
    std::size_t pick = sources.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      std::size_t remaining = sources[i].size() - next[i];
      if (remaining == 0) continue;
      acc += plan.entries[i].weight * static_cast<double>(remaining);
      pick = i;
      if (u < acc) break;
    }
    out.push_back(sources[pick][next[pick]++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct CorpusSummary {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t tupleless_train_texts = 0;
  std::size_t implicit_aspect_tuples = 0;

  bool operator==(const CorpusSummary&) const = default;
};

inline CorpusSummary summarize(const Dataset& dataset) {
  CorpusSummary s;
  for (const auto& r : dataset) {
    switch (r.split) {
      case Split::train:
        ++s.train;
        if (r.gold.empty()) ++s.tupleless_train_texts;
        break;
      case Split::validation: ++s.validation; break;
      case Split::test: ++s.test; break;
    }
    for (const auto& t : r.gold) {
      if (t.implicit_aspect()) ++s.implicit_aspect_tuples;
    }
  }
  return s;
}

inline json to_json(const CorpusSummary& s) {
  return {{"train", s.train},
          {"validation", s.validation},
          {"test", s.test},
          {"tupleless_train_texts", s.tupleless_train_texts},
          {"implicit_aspect_tuples", s.implicit_aspect_tuples}};
}

}  // namespace legoabsa
