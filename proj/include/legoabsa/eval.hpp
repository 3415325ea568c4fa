#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "legoabsa/codecs.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/instance.hpp"
#include "legoabsa/json_io.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

struct CanonicalizeOptions {
  bool case_fold = true;
};

/// Collapses whitespace, trims and (optionally) case-folds every text field.
/// The "NULL" sentinel and the polarity are left untouched.
inline SentimentTuple canonicalize(const SentimentTuple& t, const CanonicalizeOptions& options = {}) {
  auto fix = [&](const std::optional<std::string>& v) -> std::optional<std::string> {
    if (!v) return v;
    if (*v == kNullAspect) return v;
    std::string s = text::collapse_whitespace(*v);
    if (s == kNullAspect) return s;
    return options.case_fold ? text::fold_case(s) : s;
  };
  SentimentTuple out;
  out.aspect = fix(t.aspect);
  out.opinion = fix(t.opinion);
  out.category = fix(t.category);
  out.polarity = t.polarity;
  return out;
}

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }

  friend MatchCounts operator+(MatchCounts a, const MatchCounts& b) { return a += b; }
  bool operator==(const MatchCounts&) const = default;
};

/// Percentages. Zero denominators score 100 when nothing was expected or
/// predicted at all, and 0 otherwise.
struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline Scores scores_from_counts(const MatchCounts& c) {
  Scores s;
  const bool nothing = c.tp == 0 && c.fp == 0 && c.fn == 0;
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) return nothing ? 100.0 : 0.0;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  if (nothing) {
    s.f1 = 100.0;
  } else if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

struct MatchDetail {
  MatchCounts counts;
  std::vector<SentimentTuple> true_positives;
  std::vector<SentimentTuple> false_positives;
  std::vector<SentimentTuple> false_negatives;
};

namespace detail {

inline void require_uniform_kinds(const std::vector<SentimentTuple>& gold,
                                  const std::vector<SentimentTuple>& pred) {
  std::optional<std::vector<ElementKind>> kinds;
  for (const auto* side : {&gold, &pred}) {
    for (const auto& t : *side) {
      auto k = t.kinds();
      if (!kinds) {
        kinds = k;
      } else if (*kinds != k) {
        throw Error(ErrorCode::SignatureMismatch,
                    "tuple " + to_string(t) + " does not share the element kinds of the others");
      }
    }
  }
}

}  // namespace detail

/// Exact match on canonicalized sets: a tuple counts only if every element agrees.
inline MatchDetail match_detail(const std::vector<SentimentTuple>& gold,
                                const std::vector<SentimentTuple>& pred,
                                const CanonicalizeOptions& options = {}) {
  detail::require_uniform_kinds(gold, pred);
  std::set<SentimentTuple> g;
  std::set<SentimentTuple> p;
  for (const auto& t : gold) g.insert(canonicalize(t, options));
  for (const auto& t : pred) p.insert(canonicalize(t, options));
  MatchDetail d;
  for (const auto& t : p) {
    if (g.count(t)) {
      d.true_positives.push_back(t);
    } else {
      d.false_positives.push_back(t);
    }
  }
  for (const auto& t : g) {
    if (!p.count(t)) d.false_negatives.push_back(t);
  }
  d.counts = {d.true_positives.size(), d.false_positives.size(), d.false_negatives.size()};
  return d;
}

inline MatchCounts match_sets(const std::vector<SentimentTuple>& gold,
                              const std::vector<SentimentTuple>& pred,
                              const CanonicalizeOptions& options = {}) {
  return match_detail(gold, pred, options).counts;
}

struct RecordDetail {
  std::string record_id;
  std::string task;
  std::string text;
  std::string raw_output;
  std::vector<SentimentTuple> gold;
  std::vector<SentimentTuple> pred;
  std::vector<SentimentTuple> false_positives;
  std::vector<SentimentTuple> false_negatives;
  MatchCounts counts;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_segments;
};

struct TaskResult {
  MatchCounts counts;
  Scores scores;
  std::size_t records = 0;
  std::size_t decode_warnings = 0;
  std::size_t dropped_segments = 0;
};

struct EvalReport {
  std::map<std::string, TaskResult> per_task;
  std::vector<RecordDetail> per_record;  // empty when detail was not requested
  std::size_t skipped_instances = 0;     // supplementary instances carry no tuples
};

struct EvalOptions {
  DecodeMode mode = DecodeMode::lenient;
  CanonicalizeOptions canonical;
  bool keep_detail = true;
};

/// Decodes every raw output under `format`, matches it against the instance's
/// gold tuples and micro-aggregates per task (sum counts, then compute ratios).
inline EvalReport evaluate_task(const std::vector<TaskInstance>& instances,
                                const std::vector<std::string>& raw_outputs, AnswerFormat format,
                                const EvalOptions& options = {}) {
  if (instances.size() != raw_outputs.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(raw_outputs.size()) + " outputs for " +
                                               std::to_string(instances.size()) + " instances");
  }
  EvalReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (!inst.signature) {
      ++report.skipped_instances;
      continue;
    }
    DecodeOutcome decoded;
    try {
      decoded = decode(format, raw_outputs[i], *inst.signature, inst.text, options.mode);
    } catch (const Error& e) {
      throw Error(e.code, "record " + inst.record_id + " (" + inst.task + "): " + e.reason,
                  e.position);
    }
    auto m = match_detail(inst.gold_tuples, decoded.tuples, options.canonical);
    auto& task = report.per_task[inst.task];
    task.counts += m.counts;
    task.records += 1;
    task.decode_warnings += decoded.warnings.size();
    task.dropped_segments += decoded.dropped_segments.size();
    if (options.keep_detail) {
      RecordDetail d;
      d.record_id = inst.record_id;
      d.task = inst.task;
      d.text = inst.text;
      d.raw_output = raw_outputs[i];
      d.gold = inst.gold_tuples;
      d.pred = decoded.tuples;
      d.false_positives = std::move(m.false_positives);
      d.false_negatives = std::move(m.false_negatives);
      d.counts = m.counts;
      d.warnings = std::move(decoded.warnings);
      d.dropped_segments = std::move(decoded.dropped_segments);
      report.per_record.push_back(std::move(d));
    }
  }
  for (auto& [name, task] : report.per_task) task.scores = scores_from_counts(task.counts);
  return report;
}

// ---- serialization ----

inline json to_json(const MatchCounts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

inline MatchCounts match_counts_from_json(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

inline json to_json(const RecordDetail& d) {
  return {{"record_id", d.record_id},
          {"task", d.task},
          {"text", d.text},
          {"raw_output", d.raw_output},
          {"gold", to_json(d.gold)},
          {"pred", to_json(d.pred)},
          {"false_positives", to_json(d.false_positives)},
          {"false_negatives", to_json(d.false_negatives)},
          {"counts", to_json(d.counts)},
          {"warnings", d.warnings},
          {"dropped_segments", d.dropped_segments}};
}

inline RecordDetail record_detail_from_json(const json& j) {
  RecordDetail d;
  d.record_id = j.at("record_id").get<std::string>();
  d.task = j.at("task").get<std::string>();
  d.text = j.value("text", std::string());
  d.raw_output = j.value("raw_output", std::string());
  d.gold = tuples_from_json(j.value("gold", json::array()));
  d.pred = tuples_from_json(j.value("pred", json::array()));
  d.false_positives = tuples_from_json(j.at("false_positives"));
  d.false_negatives = tuples_from_json(j.at("false_negatives"));
  if (j.contains("counts")) d.counts = match_counts_from_json(j.at("counts"));
  d.warnings = j.value("warnings", std::vector<std::string>{});
  d.dropped_segments = j.value("dropped_segments", std::vector<std::string>{});
  return d;
}

inline json to_json(const EvalReport& r) {
  json tasks = json::object();
  for (const auto& [name, t] : r.per_task) {
    tasks[name] = {{"precision", t.scores.precision},
                   {"recall", t.scores.recall},
                   {"f1", t.scores.f1},
                   {"tp", t.counts.tp},
                   {"fp", t.counts.fp},
                   {"fn", t.counts.fn},
                   {"records", t.records},
                   {"decode_warnings", t.decode_warnings},
                   {"dropped_segments", t.dropped_segments}};
  }
  json records = json::array();
  for (const auto& d : r.per_record) records.push_back(to_json(d));
  return {{"tasks", tasks}, {"records", records}, {"skipped_instances", r.skipped_instances}};
}

inline EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  try {
    for (const auto& [name, t] : j.at("tasks").items()) {
      TaskResult res;
      res.counts = match_counts_from_json(t);
      res.scores = scores_from_counts(res.counts);
      res.records = t.value("records", std::size_t{0});
      res.decode_warnings = t.value("decode_warnings", std::size_t{0});
      res.dropped_segments = t.value("dropped_segments", std::size_t{0});
      r.per_task[name] = res;
    }
    if (j.contains("records")) {
      for (const auto& d : j.at("records")) r.per_record.push_back(record_detail_from_json(d));
    }
    r.skipped_instances = j.value("skipped_instances", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("eval report: ") + e.what());
  }
  return r;
}

/// Column order of the comparison table; other tasks follow alphabetically.
inline const std::vector<std::string>& report_task_order() {
  static const std::vector<std::string> order = {"ASTE", "UABSA", "AOPE", "ATE", "OTE"};
  return order;
}

inline std::string format_fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// Aligned plain-text table: one column per task, rows P / R / F1.
inline std::string render_table(const EvalReport& r) {
  std::vector<std::string> columns;
  for (const auto& t : report_task_order()) {
    if (r.per_task.count(t)) columns.push_back(t);
  }
  for (const auto& [name, _] : r.per_task) {
    if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
  }
  constexpr int kLabel = 10;
  constexpr int kCell = 9;
  auto pad_left = [](std::string s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  auto pad_right = [](std::string s, std::size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
  };
  std::string out = pad_right("", kLabel);
  for (const auto& c : columns) out += pad_left(c, kCell);
  out += "\n";
  auto row = [&](const std::string& label, auto getter) {
    out += pad_right(label, kLabel);
    for (const auto& c : columns) out += pad_left(format_fixed2(getter(r.per_task.at(c))), kCell);
    out += "\n";
  };
  row("precision", [](const TaskResult& t) { return t.scores.precision; });
  row("recall", [](const TaskResult& t) { return t.scores.recall; });
  row("f1", [](const TaskResult& t) { return t.scores.f1; });
  return out;
}

}  // namespace legoabsa
