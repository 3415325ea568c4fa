#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/text.hpp"

namespace legoabsa {

enum class AnswerFormat { gas_extraction, lego_sentinel, bartabsa_index };

inline constexpr std::array<AnswerFormat, 3> kAllFormats = {
    AnswerFormat::gas_extraction, AnswerFormat::lego_sentinel, AnswerFormat::bartabsa_index};

inline std::string_view to_string(AnswerFormat f) {
  switch (f) {
    case AnswerFormat::gas_extraction: return "gas_extraction";
    case AnswerFormat::lego_sentinel: return "lego_sentinel";
    case AnswerFormat::bartabsa_index: return "bartabsa_index";
  }
  return "gas_extraction";
}

// Short aliases "gas", "lego" and "bartabsa" are accepted.
inline AnswerFormat parse_answer_format(std::string_view s) {
  if (s == "gas_extraction" || s == "gas") return AnswerFormat::gas_extraction;
  if (s == "lego_sentinel" || s == "lego") return AnswerFormat::lego_sentinel;
  if (s == "bartabsa_index" || s == "bartabsa") return AnswerFormat::bartabsa_index;
  throw Error(ErrorCode::InvalidValue, "unknown answer format '" + std::string(s) + "'");
}

enum class DecodeMode { strict, lenient };

inline DecodeMode parse_decode_mode(std::string_view s) {
  if (s == "strict") return DecodeMode::strict;
  if (s == "lenient") return DecodeMode::lenient;
  throw Error(ErrorCode::InvalidValue, "unknown decode mode '" + std::string(s) + "'");
}

inline std::string_view to_string(DecodeMode m) {
  return m == DecodeMode::strict ? "strict" : "lenient";
}

/// Result of decoding one answer string. In strict mode `warnings` and
/// `dropped_segments` are always empty (failures throw instead).
struct DecodeOutcome {
  std::vector<SentimentTuple> tuples;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_segments;

  bool operator==(const DecodeOutcome&) const = default;
};

inline constexpr std::string_view kLegoEmptyAnswer = "<extra_id_0> none";

namespace detail {

struct SegmentError {
  ErrorCode code;
  std::string message;
};

using SegmentResult = std::variant<SentimentTuple, SegmentError>;

inline void require_signature(const std::vector<SentimentTuple>& tuples,
                              const TaskSignature& signature) {
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (!signature.matches(tuples[i])) {
      throw Error(ErrorCode::SignatureMismatch, "tuple #" + std::to_string(i) + " " +
                                                    to_string(tuples[i]) +
                                                    " does not match task " + signature.name());
    }
  }
}

// Assigns a decoded field, enforcing the tuple invariants without throwing.
inline std::optional<SegmentError> assign_field(SentimentTuple& t, ElementKind kind,
                                                std::string_view raw) {
  std::string value(text::trim(raw));
  if (value.empty()) {
    return SegmentError{ErrorCode::MalformedSegment,
                        "empty " + std::string(to_string(kind)) + " field"};
  }
  if (kind == ElementKind::polarity) {
    auto p = try_parse_polarity(value);
    if (!p) return SegmentError{ErrorCode::MalformedSegment, "unknown polarity '" + value + "'"};
    t.polarity = *p;
    return std::nullopt;
  }
  if (value == kNullAspect && kind != ElementKind::aspect) {
    return SegmentError{ErrorCode::MalformedSegment,
                        "NULL is only valid as an aspect, found in " +
                            std::string(to_string(kind))};
  }
  t.set(kind, std::move(value));
  return std::nullopt;
}

struct Segment {
  std::string_view text;  // trimmed
  std::size_t offset;     // byte offset of the trimmed segment in the answer
};

inline std::vector<Segment> split_segments(std::string_view answer) {
  std::vector<Segment> out;
  std::size_t start = 0;
  while (true) {
    std::size_t at = answer.find(';', start);
    std::string_view piece =
        answer.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start);
    std::string_view trimmed = text::trim(piece);
    std::size_t lead = trimmed.empty() ? 0 : static_cast<std::size_t>(trimmed.data() - piece.data());
    out.push_back({trimmed, start + lead});
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

template <typename ParseSegment>
DecodeOutcome decode_segments(std::string_view answer, DecodeMode mode, ParseSegment&& parse) {
  DecodeOutcome outcome;
  for (const auto& seg : split_segments(answer)) {
    SegmentResult r = parse(seg.text);
    if (auto* t = std::get_if<SentimentTuple>(&r)) {
      outcome.tuples.push_back(std::move(*t));
      continue;
    }
    auto& err = std::get<SegmentError>(r);
    if (mode == DecodeMode::strict) {
      throw Error(err.code,
                  err.message + " in segment '" + std::string(seg.text) + "' at byte " +
                      std::to_string(seg.offset),
                  seg.offset);
    }
    outcome.warnings.push_back(err.message);
    outcome.dropped_segments.emplace_back(seg.text);
  }
  return outcome;
}

inline bool is_span_kind(ElementKind k) {
  return k == ElementKind::aspect || k == ElementKind::opinion;
}

// First comma that ends a term: one directly preceded by a non-space byte.
// Falls back to the first comma at all.
inline std::size_t find_term_separator(std::string_view s) {
  std::size_t first = s.find(',');
  for (std::size_t i = first; i != std::string_view::npos; i = s.find(',', i + 1)) {
    if (i > 0 && !text::is_space(s[i - 1])) return i;
  }
  return first;
}

inline SegmentResult parse_gas_segment(std::string_view seg, const TaskSignature& signature) {
  if (seg.size() < 2 || seg.front() != '(' || seg.back() != ')') {
    return SegmentError{ErrorCode::MalformedSegment, "segment is not a parenthesized tuple"};
  }
  std::string_view rest = seg.substr(1, seg.size() - 2);
  const auto& kinds = signature.kinds();
  SentimentTuple t;

  // Closed-vocabulary fields come off the right end.
  std::size_t left_count = 0;
  while (left_count < kinds.size() && is_span_kind(kinds[left_count])) ++left_count;
  for (std::size_t i = kinds.size(); i > left_count; --i) {
    if (i - 1 == 0) {
      if (auto e = assign_field(t, kinds[0], rest)) return *e;
      rest = {};
      break;
    }
    std::size_t comma = rest.rfind(',');
    if (comma == std::string_view::npos) {
      return SegmentError{ErrorCode::MalformedSegment,
                          "expected " + std::to_string(kinds.size()) + " fields"};
    }
    if (auto e = assign_field(t, kinds[i - 1], rest.substr(comma + 1))) return *e;
    rest = rest.substr(0, comma);
  }

  // Remaining free-text fields split left to right; the last absorbs extra commas.
  for (std::size_t i = 0; i < left_count; ++i) {
    if (i + 1 == left_count) {
      if (auto e = assign_field(t, kinds[i], rest)) return *e;
      break;
    }
    std::size_t comma = find_term_separator(rest);
    if (comma == std::string_view::npos) {
      return SegmentError{ErrorCode::MalformedSegment,
                          "expected " + std::to_string(kinds.size()) + " fields"};
    }
    if (auto e = assign_field(t, kinds[i], rest.substr(0, comma))) return *e;
    rest = rest.substr(comma + 1);
  }
  return t;
}

inline constexpr std::string_view kSentinelPrefix = "<extra_id_";

inline std::string sentinel(std::size_t slot) {
  return std::string(kSentinelPrefix) + std::to_string(slot) + ">";
}

inline SegmentResult parse_lego_segment(std::string_view seg, const TaskSignature& signature) {
  struct Slot {
    std::size_t index;
    std::string_view value;
  };
  std::vector<Slot> slots;
  std::size_t pos = seg.find(kSentinelPrefix);
  if (pos == std::string_view::npos) {
    return SegmentError{ErrorCode::MalformedSegment, "no sentinel in segment"};
  }
  if (!text::trim(seg.substr(0, pos)).empty()) {
    return SegmentError{ErrorCode::MalformedSegment, "text before first sentinel"};
  }
  while (pos != std::string_view::npos) {
    std::size_t digits = pos + kSentinelPrefix.size();
    std::size_t close = seg.find('>', digits);
    std::size_t index = 0;
    if (close == std::string_view::npos || close == digits) {
      return SegmentError{ErrorCode::UnknownSentinel, "malformed sentinel"};
    }
    auto [ptr, ec] = std::from_chars(seg.data() + digits, seg.data() + close, index);
    if (ec != std::errc() || ptr != seg.data() + close) {
      return SegmentError{ErrorCode::UnknownSentinel,
                          "malformed sentinel '" + std::string(seg.substr(pos, close - pos + 1)) +
                              "'"};
    }
    if (index >= signature.arity()) {
      return SegmentError{ErrorCode::UnknownSentinel,
                          "unknown sentinel " + std::to_string(index) + " for task " +
                              signature.name()};
    }
    std::size_t next = seg.find(kSentinelPrefix, close + 1);
    slots.push_back({index, seg.substr(close + 1, next == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : next - close - 1)});
    pos = next;
  }

  for (std::size_t i = 1; i < slots.size(); ++i) {
    if (slots[i].index <= slots[i - 1].index) {
      return SegmentError{ErrorCode::SlotOrderViolation,
                          "slot " + std::to_string(slots[i].index) + " after slot " +
                              std::to_string(slots[i - 1].index)};
    }
  }
  if (slots.size() < signature.arity()) {
    std::vector<std::string> missing;
    std::size_t k = 0;
    for (std::size_t slot = 0; slot < signature.arity(); ++slot) {
      if (k < slots.size() && slots[k].index == slot) {
        ++k;
      } else {
        missing.push_back(std::to_string(slot));
      }
    }
    return SegmentError{ErrorCode::SlotOrderViolation,
                        (missing.size() == 1 ? "missing slot " : "missing slots ") +
                            text::join(missing, ", ")};
  }

  SentimentTuple t;
  for (const auto& slot : slots) {
    if (auto e = assign_field(t, signature.kinds()[slot.index], slot.value)) return *e;
  }
  return t;
}

inline std::optional<std::pair<std::size_t, std::size_t>> find_token_span(
    const std::vector<std::string>& tokens, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < needle.size() && hit; ++j) hit = tokens[i + j] == needle[j];
    if (hit) return std::pair{i, i + needle.size() - 1};
  }
  return std::nullopt;
}

inline std::size_t bartabsa_field_count(const TaskSignature& signature) {
  std::size_t n = 0;
  for (auto k : signature.kinds()) n += is_span_kind(k) ? 2 : 1;
  return n;
}

inline SegmentResult parse_bartabsa_segment(std::string_view seg, const TaskSignature& signature,
                                            const std::vector<std::string>& tokens) {
  auto fields = text::split(seg, ",");
  if (fields.size() != bartabsa_field_count(signature)) {
    return SegmentError{ErrorCode::ArityMismatch,
                        "expected " + std::to_string(bartabsa_field_count(signature)) +
                            " fields, found " + std::to_string(fields.size())};
  }
  auto parse_index = [](std::string_view raw, long long& out) {
    raw = text::trim(raw);
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    return !raw.empty() && ec == std::errc() && ptr == raw.data() + raw.size();
  };
  SentimentTuple t;
  std::size_t f = 0;
  for (auto kind : signature.kinds()) {
    if (!is_span_kind(kind)) {
      if (auto e = assign_field(t, kind, fields[f++])) return *e;
      continue;
    }
    long long start = 0;
    long long end = 0;
    if (!parse_index(fields[f], start) || !parse_index(fields[f + 1], end)) {
      return SegmentError{ErrorCode::MalformedSegment, "non-integer index"};
    }
    f += 2;
    if (start == -1 && end == -1 && kind == ElementKind::aspect) {
      t.aspect = std::string(kNullAspect);
      continue;
    }
    for (long long idx : {start, end}) {
      if (idx < 0 || static_cast<unsigned long long>(idx) >= tokens.size()) {
        return SegmentError{ErrorCode::IndexOutOfRange,
                            "index " + std::to_string(idx) + " out of range"};
      }
    }
    if (start > end) {
      return SegmentError{ErrorCode::IndexOutOfRange,
                          "span " + std::to_string(start) + ".." + std::to_string(end) +
                              " is inverted"};
    }
    std::vector<std::string_view> span(tokens.begin() + start, tokens.begin() + end + 1);
    if (auto e = assign_field(t, kind, text::join(span, " "))) return *e;
  }
  return t;
}

}  // namespace detail

// ---- GAS extraction paradigm: "(a, o, p); (a, o, p)" ----

inline std::string encode_gas(const std::vector<SentimentTuple>& tuples,
                              const TaskSignature& signature) {
  detail::require_signature(tuples, signature);
  std::vector<std::string> segments;
  for (const auto& t : tuples) {
    std::vector<std::string> fields;
    for (auto k : signature.kinds()) fields.push_back(*t.value(k));
    segments.push_back("(" + text::join(fields, ", ") + ")");
  }
  return text::join(segments, "; ");
}

/// Polarity and category are peeled from the right, so a comma inside a term
/// survives when the field count exceeds the signature arity.
inline DecodeOutcome decode_gas(std::string_view answer, const TaskSignature& signature,
                                DecodeMode mode) {
  if (text::trim(answer).empty()) return {};
  return detail::decode_segments(answer, mode, [&](std::string_view seg) {
    return detail::parse_gas_segment(seg, signature);
  });
}

// ---- LEGO sentinel slots: "<extra_id_0> a <extra_id_1> o ; <extra_id_0> ..." ----

inline std::string encode_lego(const std::vector<SentimentTuple>& tuples,
                               const TaskSignature& signature) {
  detail::require_signature(tuples, signature);
  if (tuples.empty()) return std::string(kLegoEmptyAnswer);
  std::vector<std::string> segments;
  for (const auto& t : tuples) {
    std::vector<std::string> slots;
    for (std::size_t i = 0; i < signature.arity(); ++i) {
      slots.push_back(detail::sentinel(i) + " " + *t.value(signature.kinds()[i]));
    }
    segments.push_back(text::join(slots, " "));
  }
  return text::join(segments, " ; ");
}

/// Slot indices restart at 0 for every tuple. In lenient mode a tuple with a
/// missing slot is dropped with a warning.
inline DecodeOutcome decode_lego(std::string_view answer, const TaskSignature& signature,
                                 DecodeMode mode) {
  std::string_view trimmed = text::trim(answer);
  if (text::collapse_whitespace(trimmed) == kLegoEmptyAnswer) return {};
  if (trimmed.empty()) {
    if (mode == DecodeMode::strict) {
      throw Error(ErrorCode::MalformedSegment, "empty answer; expected '" +
                                                   std::string(kLegoEmptyAnswer) + "'",
                  0);
    }
    DecodeOutcome out;
    out.warnings.push_back("empty answer");
    return out;
  }
  return detail::decode_segments(answer, mode, [&](std::string_view seg) {
    return detail::parse_lego_segment(seg, signature);
  });
}

// ---- BARTABSA token indices: "a_s,a_e,o_s,o_e,polarity; ..." ----

/// Span terms must be contiguous runs of the whitespace tokens of `source_text`;
/// the leftmost occurrence is used. The implicit aspect encodes as "-1,-1".
inline std::string encode_bartabsa(const std::vector<SentimentTuple>& tuples,
                                   const TaskSignature& signature, std::string_view source_text) {
  detail::require_signature(tuples, signature);
  const auto tokens = text::split_whitespace(source_text);
  std::vector<std::string> segments;
  for (const auto& t : tuples) {
    std::vector<std::string> fields;
    for (auto k : signature.kinds()) {
      std::string value = *t.value(k);
      if (!detail::is_span_kind(k)) {
        if (value.find_first_of(",;") != std::string::npos) {
          throw Error(ErrorCode::InvalidValue,
                      std::string(to_string(k)) + " '" + value + "' contains ',' or ';'");
        }
        fields.push_back(value);
        continue;
      }
      if (k == ElementKind::aspect && value == kNullAspect) {
        fields.push_back("-1");
        fields.push_back("-1");
        continue;
      }
      auto span = detail::find_token_span(tokens, text::split_whitespace(value));
      if (!span) {
        throw Error(ErrorCode::TermNotTokenAligned,
                    std::string(to_string(k)) + " '" + value + "' is not a token run of '" +
                        std::string(source_text) + "'");
      }
      fields.push_back(std::to_string(span->first));
      fields.push_back(std::to_string(span->second));
    }
    segments.push_back(text::join(fields, ","));
  }
  return text::join(segments, "; ");
}

inline DecodeOutcome decode_bartabsa(std::string_view answer, const TaskSignature& signature,
                                     std::string_view source_text, DecodeMode mode) {
  if (text::trim(answer).empty()) return {};
  const auto tokens = text::split_whitespace(source_text);
  return detail::decode_segments(answer, mode, [&](std::string_view seg) {
    return detail::parse_bartabsa_segment(seg, signature, tokens);
  });
}

// ---- format dispatch ----

inline std::string encode(AnswerFormat format, const std::vector<SentimentTuple>& tuples,
                          const TaskSignature& signature, std::string_view source_text) {
  switch (format) {
    case AnswerFormat::gas_extraction: return encode_gas(tuples, signature);
    case AnswerFormat::lego_sentinel: return encode_lego(tuples, signature);
    case AnswerFormat::bartabsa_index: return encode_bartabsa(tuples, signature, source_text);
  }
  return {};
}

inline DecodeOutcome decode(AnswerFormat format, std::string_view answer,
                            const TaskSignature& signature, std::string_view source_text,
                            DecodeMode mode) {
  switch (format) {
    case AnswerFormat::gas_extraction: return decode_gas(answer, signature, mode);
    case AnswerFormat::lego_sentinel: return decode_lego(answer, signature, mode);
    case AnswerFormat::bartabsa_index: return decode_bartabsa(answer, signature, source_text, mode);
  }
  return {};
}

}  // namespace legoabsa
