#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "legoabsa/analysis.hpp"
#include "legoabsa/backend.hpp"
#include "legoabsa/codecs.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/datasets.hpp"
#include "legoabsa/error.hpp"
#include "legoabsa/eval.hpp"
#include "legoabsa/http_backend.hpp"
#include "legoabsa/instance.hpp"
#include "legoabsa/json_io.hpp"
#include "legoabsa/prompts.hpp"

namespace legoabsa {

namespace fs = std::filesystem;

struct SupplementarySource {
  SupplementaryKind kind = SupplementaryKind::pos_tagging;
  std::string path;
  double weight = 1.0;
};

/// Fine-tuning settings of the reference setup. Recorded alongside every run
/// for the external trainer; nothing here is consumed by the toolkit itself.
inline json default_training_record() {
  return {{"model", "mT5-base"},
          {"epochs", 10},
          {"learning_rate", 3e-4},
          {"batch_size", 8},
          {"gradient_accumulation_steps", 2}};
}

struct PipelineConfig {
  std::vector<std::string> lines;  // "path" or "path:split"
  std::string dataset;             // native JSONL dataset, used when `lines` is empty
  std::string preset = "all";
  std::optional<MixPlan> plan;
  MixStrategy mix_strategy = MixStrategy::round_robin;
  std::vector<std::string> eval_tasks = {"ASTE", "UABSA", "AOPE", "ATE", "OTE"};
  Split train_split = Split::train;
  Split eval_split = Split::test;
  PromptStyle style = PromptStyle::prefix_instruction;
  AnswerFormat format = AnswerFormat::lego_sentinel;
  std::string backend = "oracle";
  GenerationParams generation;
  std::size_t http_batch_size = 16;
  std::size_t http_max_in_flight = 4;
  int http_max_retries = 3;
  int http_timeout_s = 60;
  std::vector<SupplementarySource> supplementary;
  bool keep_null_aspect = true;
  bool case_fold = true;
  DecodeMode decode_mode = DecodeMode::lenient;
  std::string templates;  // optional template registry file
  std::string output_dir = "run";
  std::uint64_t seed = 42;
  json training = default_training_record();
};

inline json to_json(const PipelineConfig& c) {
  json supplementary = json::array();
  for (const auto& s : c.supplementary) {
    supplementary.push_back({{"kind", to_string(s.kind)}, {"path", s.path}, {"weight", s.weight}});
  }
  json j = {{"lines", c.lines},
            {"dataset", c.dataset},
            {"preset", c.preset},
            {"mix_strategy", to_string(c.mix_strategy)},
            {"eval_tasks", c.eval_tasks},
            {"train_split", to_string(c.train_split)},
            {"eval_split", to_string(c.eval_split)},
            {"prompt_style", to_string(c.style)},
            {"answer_format", to_string(c.format)},
            {"backend", c.backend},
            {"generation", to_json(c.generation)},
            {"http",
             {{"batch_size", c.http_batch_size},
              {"max_in_flight", c.http_max_in_flight},
              {"max_retries", c.http_max_retries},
              {"timeout_s", c.http_timeout_s}}},
            {"supplementary", supplementary},
            {"keep_null_aspect", c.keep_null_aspect},
            {"case_fold", c.case_fold},
            {"decode_mode", to_string(c.decode_mode)},
            {"templates", c.templates},
            {"output_dir", c.output_dir},
            {"seed", c.seed},
            {"training", c.training}};
  if (c.plan) j["plan"] = to_json(*c.plan);
  return j;
}

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
inline PipelineConfig pipeline_config_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "lines",       "dataset",       "preset",           "plan",         "mix_strategy",
      "eval_tasks",  "train_split",   "eval_split",       "prompt_style", "answer_format",
      "backend",     "generation",    "http",             "supplementary", "keep_null_aspect",
      "case_fold",   "decode_mode",   "templates",        "output_dir",   "seed",
      "training"};
  if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::InvalidValue, "unknown config key '" + key + "'");
    }
  }
  PipelineConfig c;
  try {
    c.lines = j.value("lines", c.lines);
    c.dataset = j.value("dataset", c.dataset);
    c.preset = j.value("preset", c.preset);
    if (j.contains("plan")) c.plan = mix_plan_from_json(j.at("plan"));
    c.mix_strategy = parse_mix_strategy(j.value("mix_strategy", std::string("round_robin")));
    c.eval_tasks = j.value("eval_tasks", c.eval_tasks);
    c.train_split = parse_split(j.value("train_split", std::string("train")));
    c.eval_split = parse_split(j.value("eval_split", std::string("test")));
    c.style = parse_prompt_style(j.value("prompt_style", std::string(to_string(c.style))));
    c.format = parse_answer_format(j.value("answer_format", std::string(to_string(c.format))));
    c.backend = j.value("backend", c.backend);
    if (j.contains("generation")) c.generation = generation_params_from_json(j.at("generation"));
    if (j.contains("http")) {
      const auto& h = j.at("http");
      c.http_batch_size = h.value("batch_size", c.http_batch_size);
      c.http_max_in_flight = h.value("max_in_flight", c.http_max_in_flight);
      c.http_max_retries = h.value("max_retries", c.http_max_retries);
      c.http_timeout_s = h.value("timeout_s", c.http_timeout_s);
    }
    if (j.contains("supplementary")) {
      for (const auto& s : j.at("supplementary")) {
        c.supplementary.push_back({parse_supplementary_kind(s.at("kind").get<std::string>()),
                                   s.at("path").get<std::string>(), s.value("weight", 1.0)});
      }
    }
    c.keep_null_aspect = j.value("keep_null_aspect", c.keep_null_aspect);
    c.case_fold = j.value("case_fold", c.case_fold);
    c.decode_mode = parse_decode_mode(j.value("decode_mode", std::string("lenient")));
    c.templates = j.value("templates", c.templates);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    c.training = j.value("training", c.training);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("config: ") + e.what());
  }
  return c;
}

/// FNV-1a over the canonical JSON of the config, minus its output location.
inline std::string config_hash(const PipelineConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char byte : j.dump()) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- backends ----

struct BackendSettings {
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  int timeout_s = 60;
};

/// "mock[:text]", "oracle", "golden:path", "golden-strict:path", "http[:endpoint]".
/// LEGOABSA_ENDPOINT, when set, overrides the http endpoint.
inline std::unique_ptr<Backend> make_backend(const std::string& spec,
                                             const std::vector<TaskInstance>& instances,
                                             const BackendSettings& settings = {}) {
  std::string kind = spec.substr(0, spec.find(':'));
  std::string arg = spec.find(':') == std::string::npos ? "" : spec.substr(spec.find(':') + 1);
  if (kind == "mock") return std::make_unique<MockBackend>(arg);
  if (kind == "oracle") return std::make_unique<OracleBackend>(instances);
  if (kind == "golden" || kind == "golden-strict") {
    if (arg.empty()) throw Error(ErrorCode::InvalidValue, "golden backend needs a file path");
    return std::make_unique<GoldenBackend>(GoldenBackend::from_file(arg, kind == "golden-strict"));
  }
  if (kind == "http") {
    if (const char* env = std::getenv(kEndpointEnvVar); env && *env) arg = env;
    if (arg.empty()) {
      throw Error(ErrorCode::InvalidValue,
                  std::string("http backend needs an endpoint or ") + kEndpointEnvVar);
    }
    HttpOptions opts;
    opts.batch_size = settings.batch_size;
    opts.max_in_flight = settings.max_in_flight;
    opts.max_retries = settings.max_retries;
    opts.timeout = std::chrono::seconds(settings.timeout_s);
    return std::make_unique<HttpBackend>(arg, opts);
  }
  throw Error(ErrorCode::InvalidValue, "unknown backend spec '" + spec + "'");
}

inline std::vector<std::string> run_inference(Backend& backend,
                                              const std::vector<TaskInstance>& instances,
                                              const GenerationParams& params) {
  std::vector<std::string> prompts;
  prompts.reserve(instances.size());
  for (const auto& i : instances) prompts.push_back(i.prompt);
  return generate_chunked(backend, prompts, params, 0);
}

// ---- raw outputs file: {"record_id", "task", "output"} per line ----

struct OutputRow {
  std::string record_id;
  std::string task;
  std::string output;
};

inline std::string outputs_to_jsonl(const std::vector<TaskInstance>& instances,
                                    const std::vector<std::string>& outputs) {
  std::string s;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    s += json{{"record_id", instances[i].record_id},
              {"task", instances[i].task},
              {"output", outputs[i]}}
             .dump() +
         "\n";
  }
  return s;
}

// Also accepts a plain JSON array of strings.
inline std::vector<OutputRow> read_outputs(const std::string& path) {
  std::vector<OutputRow> rows;
  auto whole = json::parse(read_file(path), nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (const auto& v : whole) {
      if (!v.is_string()) throw Error(ErrorCode::InvalidValue, path + ": expected strings");
      rows.push_back({"", "", v.get<std::string>()});
    }
    return rows;
  }
  for_each_jsonl(path, [&](const json& j) {
    if (j.is_string()) {
      rows.push_back({"", "", j.get<std::string>()});
      return;
    }
    rows.push_back({j.value("record_id", std::string()), j.value("task", std::string()),
                    j.at("output").get<std::string>()});
  });
  return rows;
}

/// Orders raw outputs like `instances`: by (record_id, task) when every row
/// carries both keys, else positionally.
inline std::vector<std::string> align_outputs(const std::vector<TaskInstance>& instances,
                                              const std::vector<OutputRow>& rows) {
  if (rows.size() != instances.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(rows.size()) + " outputs for " +
                                               std::to_string(instances.size()) + " instances");
  }
  bool keyed = std::all_of(rows.begin(), rows.end(),
                           [](const OutputRow& r) { return !r.record_id.empty() && !r.task.empty(); });
  std::vector<std::string> out;
  out.reserve(rows.size());
  if (!keyed) {
    for (const auto& r : rows) out.push_back(r.output);
    return out;
  }
  std::map<std::pair<std::string, std::string>, std::string> by_key;
  for (const auto& r : rows) by_key[{r.record_id, r.task}] = r.output;
  for (const auto& inst : instances) {
    auto it = by_key.find({inst.record_id, inst.task});
    if (it == by_key.end()) {
      throw Error(ErrorCode::LengthMismatch,
                  "no output for record " + inst.record_id + " task " + inst.task);
    }
    out.push_back(it->second);
  }
  return out;
}

// ---- stages ----

/// Imports several "path[:split]" specs, merged in argument order.
inline ImportResult import_specs(const std::vector<std::string>& specs) {
  ImportResult merged;
  for (const auto& spec : specs) {
    std::string path = spec;
    std::optional<Split> split;
    if (auto colon = spec.rfind(':'); colon != std::string::npos) {
      if (auto s = try_parse_split(spec.substr(colon + 1))) {
        split = s;
        path = spec.substr(0, colon);
      }
    }
    auto r = import_line_format(path, split);
    for (auto& rec : r.dataset) merged.dataset.push_back(std::move(rec));
    for (auto& f : r.report.files) merged.report.files.push_back(std::move(f));
    for (auto& s : r.report.skipped) {
      s.reason = path + ":" + std::to_string(s.line) + ": " + s.reason;
      merged.report.skipped.push_back(std::move(s));
    }
    for (auto& v : r.report.violations) merged.report.violations.push_back(std::move(v));
    merged.report.duplicates_removed += r.report.duplicates_removed;
  }
  return merged;
}

inline PromptTemplates load_templates(const std::string& path) {
  if (path.empty()) return PromptTemplates::defaults();
  return templates_from_json(read_json_file(path));
}

/// Per-task evaluation instances, tasks in the given order, records in file order.
inline std::vector<TaskInstance> build_eval_instances(const Dataset& dataset,
                                                      const std::vector<std::string>& tasks,
                                                      PromptStyle style, AnswerFormat format,
                                                      const PromptTemplates& templates,
                                                      const DeriveOptions& derive = {}) {
  std::vector<TaskInstance> out;
  for (const auto& task : tasks) {
    auto sig = signature_by_name(task);
    auto inst = make_instances(derive_task(dataset, sig, derive), sig, style, format, templates);
    out.insert(out.end(), inst.begin(), inst.end());
  }
  return out;
}

inline std::map<std::string, std::vector<TaskInstance>> load_supplementary(
    const std::vector<SupplementarySource>& sources, const PromptTemplates& templates) {
  std::map<std::string, std::vector<TaskInstance>> out;
  for (const auto& s : sources) {
    SupplementaryRows rows;
    if (s.kind == SupplementaryKind::pos_tagging) {
      rows = read_pos_tsv(s.path);
    } else {
      rows = read_labeled_tsv(s.path);
    }
    out[std::string(to_string(s.kind))] = adapt_supplementary(s.kind, rows, templates);
  }
  return out;
}

inline MixPlan effective_plan(const PipelineConfig& c) {
  MixPlan plan = c.plan ? *c.plan : preset_plan(c.preset, c.seed, c.mix_strategy);
  if (!c.plan) {
    for (const auto& s : c.supplementary) {
      plan.entries.push_back({std::string(to_string(s.kind)), s.weight, {}, {}});
    }
  }
  return plan;
}

struct PipelineResult {
  Dataset dataset;
  CorpusSummary summary;
  std::vector<TaskInstance> train_mix;
  std::vector<TaskInstance> eval_instances;
  std::vector<std::string> outputs;
  EvalReport report;
  TriageSummary triage;
  std::string config_hash;
};

inline json report_json(const EvalReport& report, const std::string& hash) {
  json j = to_json(report);
  j["config_hash"] = hash;
  return j;
}

/// import -> derive -> prompt -> infer -> eval -> analyze. Every artifact is
/// written under `config.output_dir`.
inline PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log) {
  PipelineResult result;
  result.config_hash = config_hash(config);
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "derived");
  write_json_file((out_dir / "effective_config.json").string(), to_json(config));

  // import
  if (!config.lines.empty()) {
    auto imported = import_specs(config.lines);
    result.dataset = std::move(imported.dataset);
    write_json_file((out_dir / "import_report.json").string(), to_json(imported.report));
    log << "import: " << result.dataset.size() << " records, " << imported.report.skipped.size()
        << " skipped lines, " << imported.report.violations.size() << " violations\n";
  } else if (!config.dataset.empty()) {
    result.dataset = read_dataset(config.dataset);
  } else {
    throw Error(ErrorCode::InvalidValue, "config names neither 'lines' nor 'dataset'");
  }
  write_dataset((out_dir / "dataset.jsonl").string(), result.dataset);
  result.summary = summarize(result.dataset);
  write_json_file((out_dir / "summary.json").string(), to_json(result.summary));

  // derive
  const PromptTemplates templates = load_templates(config.templates);
  const DeriveOptions derive{config.keep_null_aspect};
  const MixPlan plan = effective_plan(config);
  std::vector<std::string> tasks;
  for (const auto& e : plan.entries) {
    if (find_signature(e.task)) tasks.push_back(e.task);
  }
  for (const auto& t : config.eval_tasks) {
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
  }
  std::vector<std::pair<Dataset, TaskSignature>> train_sets;
  std::map<std::string, Dataset> derived;
  for (const auto& t : tasks) {
    auto sig = signature_by_name(t);
    derived[t] = derive_task(result.dataset, sig, derive);
    write_dataset((out_dir / "derived" / (t + ".jsonl")).string(), derived[t]);
    train_sets.emplace_back(filter_split(derived[t], config.train_split), sig);
  }

  // prompt
  auto supplementary = load_supplementary(config.supplementary, templates);
  result.train_mix =
      mix_multitask(train_sets, plan, config.format, config.style, templates, supplementary);
  write_instances((out_dir / "train_mix.jsonl").string(), result.train_mix);
  result.eval_instances =
      build_eval_instances(filter_split(result.dataset, config.eval_split), config.eval_tasks,
                           config.style, config.format, templates, derive);
  write_instances((out_dir / "eval_instances.jsonl").string(), result.eval_instances);
  log << "prompt: " << result.train_mix.size() << " training instances, "
      << result.eval_instances.size() << " evaluation instances\n";

  // infer
  auto backend = make_backend(config.backend, result.eval_instances,
                              {config.http_batch_size, config.http_max_in_flight,
                               config.http_max_retries, config.http_timeout_s});
  result.outputs = run_inference(*backend, result.eval_instances, config.generation);
  write_file((out_dir / "outputs.jsonl").string(),
             outputs_to_jsonl(result.eval_instances, result.outputs));

  // eval
  EvalOptions eval_options;
  eval_options.mode = config.decode_mode;
  eval_options.canonical.case_fold = config.case_fold;
  result.report = evaluate_task(result.eval_instances, result.outputs, config.format, eval_options);
  write_json_file((out_dir / "report.json").string(), report_json(result.report, result.config_hash));
  write_file((out_dir / "report.txt").string(),
             "config " + result.config_hash + "\n" + render_table(result.report));

  // analyze
  result.triage = analyze_run(result.report, eval_options.canonical);
  write_json_file((out_dir / "triage.json").string(), to_json(result.triage));
  write_file((out_dir / "worksheet.jsonl").string(), to_jsonl(result.triage.worksheet()));
  write_file((out_dir / "worksheet.txt").string(), render_worksheet(result.triage));
  log << render_table(result.report);
  return result;
}

}  // namespace legoabsa
