#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/instance.hpp"

namespace legoabsa {

using nlohmann::json;

inline json to_json(const SentimentTuple& t) {
  json j = json::object();
  for (auto k : kAllKinds) {
    if (auto v = t.value(k)) j[std::string(to_string(k))] = *v;
  }
  return j;
}

inline SentimentTuple tuple_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "tuple must be a JSON object");
  SentimentTuple t;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) {
      throw Error(ErrorCode::InvalidValue, "tuple field '" + key + "' must be a string");
    }
    t.set(parse_element_kind(key), value.get<std::string>());
  }
  return t;
}

inline json to_json(const std::vector<SentimentTuple>& tuples) {
  json j = json::array();
  for (const auto& t : tuples) j.push_back(to_json(t));
  return j;
}

inline std::vector<SentimentTuple> tuples_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidValue, "tuple list must be a JSON array");
  std::vector<SentimentTuple> out;
  for (const auto& e : j) out.push_back(tuple_from_json(e));
  return out;
}

inline json to_json(const Record& r) {
  return {{"id", r.id}, {"text", r.text}, {"split", to_string(r.split)}, {"gold", to_json(r.gold)}};
}

inline Record record_from_json(const json& j) {
  Record r;
  try {
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.split = parse_split(j.value("split", std::string("train")));
    r.gold = tuples_from_json(j.value("gold", json::array()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("record: ") + e.what());
  }
  return r;
}

inline json to_json(const TaskSignature& s) {
  json kinds = json::array();
  for (auto k : s.kinds()) kinds.push_back(to_string(k));
  return {{"name", s.name()}, {"kinds", kinds}};
}

inline TaskSignature signature_from_json(const json& j) {
  std::vector<ElementKind> kinds;
  for (const auto& k : j.at("kinds")) kinds.push_back(parse_element_kind(k.get<std::string>()));
  return TaskSignature(j.at("name").get<std::string>(), kinds);
}

inline json to_json(const TaskInstance& inst) {
  json j = {{"record_id", inst.record_id},
            {"text", inst.text},
            {"task", inst.task},
            {"style", to_string(inst.style)},
            {"format", to_string(inst.format)},
            {"prompt", inst.prompt},
            {"gold_answer", inst.gold_answer},
            {"gold", to_json(inst.gold_tuples)}};
  if (inst.signature) j["signature"] = to_json(*inst.signature);
  return j;
}

inline TaskInstance instance_from_json(const json& j) {
  TaskInstance inst;
  try {
    inst.record_id = j.at("record_id").get<std::string>();
    inst.text = j.value("text", std::string());
    inst.task = j.at("task").get<std::string>();
    if (j.contains("signature")) inst.signature = signature_from_json(j.at("signature"));
    inst.style = parse_prompt_style(j.value("style", std::string("lego_mask")));
    inst.format = parse_answer_format(j.value("format", std::string("gas_extraction")));
    inst.prompt = j.at("prompt").get<std::string>();
    inst.gold_answer = j.value("gold_answer", std::string());
    inst.gold_tuples = tuples_from_json(j.value("gold", json::array()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("task instance: ") + e.what());
  }
  return inst;
}

// ---- files ----

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::UnreadableFile, "write failed for '" + path + "'");
}

inline json read_json_file(const std::string& path) {
  std::string content = read_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidValue, "'" + path + "': " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

// Parses one JSON value per non-blank line; errors carry the 1-based line number.
inline void for_each_jsonl(const std::string& path, const std::function<void(const json&)>& fn) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedLine, path + ":" + std::to_string(lineno) + ": " + e.what(),
                  lineno);
    }
    try {
      fn(j);
    } catch (const Error& e) {
      throw Error(e.code, path + ":" + std::to_string(lineno) + ": " + e.reason, lineno);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, path + ":" + std::to_string(lineno) + ": " + e.what(),
                  lineno);
    }
  }
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) out += to_json(item).dump() + "\n";
  return out;
}

// A file holding one JSON array is read element-wise; anything else as JSONL.
inline void for_each_json_item(const std::string& path, const std::function<void(const json&)>& fn) {
  auto whole = json::parse(read_file(path), nullptr, false);
  if (whole.is_discarded() || !whole.is_array()) {
    for_each_jsonl(path, fn);
    return;
  }
  std::size_t index = 0;
  for (const auto& item : whole) {
    ++index;
    try {
      fn(item);
    } catch (const Error& e) {
      throw Error(e.code, path + "[" + std::to_string(index - 1) + "]: " + e.reason, index);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, path + "[" + std::to_string(index - 1) + "]: " + e.what(),
                  index);
    }
  }
}

inline Dataset read_dataset(const std::string& path) {
  Dataset d;
  for_each_json_item(path, [&](const json& j) { d.push_back(record_from_json(j)); });
  return d;
}

inline void write_dataset(const std::string& path, const Dataset& d) { write_file(path, to_jsonl(d)); }

inline std::vector<TaskInstance> read_instances(const std::string& path) {
  std::vector<TaskInstance> v;
  for_each_json_item(path, [&](const json& j) { v.push_back(instance_from_json(j)); });
  return v;
}

inline void write_instances(const std::string& path, const std::vector<TaskInstance>& v) {
  write_file(path, to_jsonl(v));
}

}  // namespace legoabsa
