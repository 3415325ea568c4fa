#pragma once

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "legoabsa/analysis.hpp"
#include "legoabsa/pipeline.hpp"

namespace legoabsa {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitBackend = 2 };

inline bool is_backend_code(ErrorCode c) {
  return c == ErrorCode::BackendUnavailable || c == ErrorCode::BackendProtocolError;
}

namespace detail {

inline void print_json_or_write(std::ostream& out, const json& j, const std::string& path) {
  if (path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json_file(path, j);
  }
}

inline void write_or_print(std::ostream& out, const std::string& content, const std::string& path) {
  if (path.empty()) {
    out << content;
  } else {
    write_file(path, content);
  }
}

}  // namespace detail

/// Entry point of the `legoabsa` tool. Returns 0 on success, 1 for invalid
/// input or configuration, 2 when the generation backend fails.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Indonesian aspect-based sentiment toolkit: import, prompt, infer, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "legoabsa 0.1.0");

  // import
  std::vector<std::string> import_lines_opt;
  std::string import_out;
  std::string import_report;
  auto* import_cmd = app.add_subcommand("import", "Convert line-format files into a JSONL dataset");
  import_cmd->add_option("files,--lines", import_lines_opt, "Files as path or path:split")->required();
  import_cmd->add_option("-o,--out", import_out, "Output dataset (JSONL)")->required();
  import_cmd->add_option("--report", import_report, "Write the import report here");

  // summary
  std::string summary_dataset;
  auto* summary_cmd = app.add_subcommand("summary", "Print split sizes and corpus statistics");
  summary_cmd->add_option("dataset,--dataset", summary_dataset, "Dataset (JSONL)")->required();

  // derive
  std::string derive_dataset;
  std::string derive_task_name;
  std::string derive_out;
  bool derive_drop_null = false;
  auto* derive_cmd = app.add_subcommand("derive", "Project a dataset onto one task");
  derive_cmd->add_option("dataset,--dataset", derive_dataset, "Dataset (JSONL)")->required();
  derive_cmd->add_option("-t,--task", derive_task_name, "Task name, e.g. ASTE")->required();
  derive_cmd->add_option("-o,--out", derive_out, "Output dataset (JSONL)")->required();
  derive_cmd->add_flag("--drop-null-aspect", derive_drop_null,
                       "Drop tuples whose aspect is implicit");

  // prompt
  std::string prompt_dataset;
  std::vector<std::string> prompt_tasks;
  std::string prompt_preset;
  std::string prompt_style = "prefix_instruction";
  std::string prompt_format = "lego_sentinel";
  std::string prompt_split;
  std::string prompt_templates;
  std::string prompt_strategy = "round_robin";
  std::uint64_t prompt_seed = 42;
  std::string prompt_out;
  auto* prompt_cmd = app.add_subcommand("prompt", "Build task instances (prompt + gold answer)");
  prompt_cmd->add_option("dataset,--dataset", prompt_dataset, "Dataset (JSONL)")->required();
  prompt_cmd->add_option("-t,--task", prompt_tasks, "Task(s), instances emitted task by task");
  prompt_cmd->add_option("--preset", prompt_preset, "Mix a task preset instead, e.g. all");
  prompt_cmd->add_option("--style", prompt_style, "lego_mask | prefix_instruction | one_token");
  prompt_cmd->add_option("--format", prompt_format, "gas_extraction | lego_sentinel | bartabsa_index");
  prompt_cmd->add_option("--split", prompt_split, "Keep only this split");
  prompt_cmd->add_option("--templates", prompt_templates, "Prompt template registry (JSON)");
  prompt_cmd->add_option("--strategy", prompt_strategy, "Mix strategy: round_robin | proportional");
  prompt_cmd->add_option("--seed", prompt_seed, "Mix seed");
  prompt_cmd->add_option("-o,--out", prompt_out, "Output instances (JSONL)")->required();

  // infer
  std::string infer_instances;
  std::string infer_backend = "oracle";
  std::string infer_out;
  GenerationParams infer_params;
  BackendSettings infer_settings;
  auto* infer_cmd = app.add_subcommand("infer", "Run a generation backend over instances");
  infer_cmd->add_option("instances,--instances", infer_instances, "Instances (JSONL)")->required();
  infer_cmd->add_option("-b,--backend", infer_backend,
                        "mock[:text] | oracle | golden:path | golden-strict:path | http[:url]");
  infer_cmd->add_option("--max-new-tokens", infer_params.max_new_tokens);
  infer_cmd->add_option("--num-beams", infer_params.num_beams);
  infer_cmd->add_option("--batch-size", infer_settings.batch_size);
  infer_cmd->add_option("--max-in-flight", infer_settings.max_in_flight);
  infer_cmd->add_option("--retries", infer_settings.max_retries);
  infer_cmd->add_option("--timeout", infer_settings.timeout_s, "Seconds per request");
  infer_cmd->add_option("-o,--out", infer_out, "Raw outputs (JSONL)")->required();

  // eval
  std::string eval_gold;
  std::string eval_instances;
  std::string eval_pred;
  std::vector<std::string> eval_tasks;
  std::string eval_split;
  std::string eval_format = "lego_sentinel";
  std::string eval_mode = "lenient";
  bool eval_no_fold = false;
  std::string eval_out;
  std::string eval_table;
  auto* eval_cmd = app.add_subcommand("eval", "Score raw outputs against gold tuples");
  auto* gold_opt = eval_cmd->add_option("--gold", eval_gold, "Gold dataset (JSONL)");
  auto* inst_opt = eval_cmd->add_option("--instances", eval_instances, "Gold instances (JSONL)");
  gold_opt->excludes(inst_opt);
  eval_cmd->add_option("--pred", eval_pred, "Raw outputs (JSONL or JSON array)")->required();
  eval_cmd->add_option("-t,--task", eval_tasks, "Task(s) to score with --gold");
  eval_cmd->add_option("--split", eval_split, "Keep only this split with --gold");
  eval_cmd->add_option("--format", eval_format, "Answer format of the outputs");
  eval_cmd->add_option("--mode", eval_mode, "lenient | strict");
  eval_cmd->add_flag("--no-case-fold", eval_no_fold, "Compare terms case-sensitively");
  eval_cmd->add_option("-o,--out", eval_out, "Write the JSON report here");
  eval_cmd->add_option("--table", eval_table, "Write the text table here");

  // analyze
  std::string analyze_report;
  std::string analyze_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Tag errors in an evaluation report");
  analyze_cmd->add_option("report,--report", analyze_report, "Report produced by eval (JSON)")->required();
  analyze_cmd->add_option("-o,--out-dir", analyze_out, "Directory for triage files")->required();

  // pipeline
  std::string pipeline_config;
  std::string pipeline_out;
  std::optional<std::uint64_t> pipeline_seed;
  std::string pipeline_backend;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage from one config");
  pipeline_cmd->add_option("config,-c,--config", pipeline_config, "Config file (JSON)")->required();
  pipeline_cmd->add_option("-o,--out-dir", pipeline_out, "Override output_dir");
  pipeline_cmd->add_option("--seed", pipeline_seed, "Override seed");
  pipeline_cmd->add_option("-b,--backend", pipeline_backend, "Override backend");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (import_cmd->parsed()) {
      auto result = import_specs(import_lines_opt);
      write_dataset(import_out, result.dataset);
      if (!import_report.empty()) write_json_file(import_report, to_json(result.report));
      err << "imported " << result.dataset.size() << " records, skipped "
          << result.report.skipped.size() << " lines, " << result.report.violations.size()
          << " violations\n";
    } else if (summary_cmd->parsed()) {
      out << to_json(summarize(read_dataset(summary_dataset))).dump(2) << "\n";
    } else if (derive_cmd->parsed()) {
      auto sig = signature_by_name(derive_task_name);
      write_dataset(derive_out,
                    derive_task(read_dataset(derive_dataset), sig, {!derive_drop_null}));
    } else if (prompt_cmd->parsed()) {
      if (prompt_tasks.empty() == prompt_preset.empty()) {
        throw Error(ErrorCode::InvalidValue, "give either --task or --preset");
      }
      auto dataset = read_dataset(prompt_dataset);
      if (!prompt_split.empty()) dataset = filter_split(dataset, parse_split(prompt_split));
      auto templates = load_templates(prompt_templates);
      auto style = parse_prompt_style(prompt_style);
      auto format = parse_answer_format(prompt_format);
      std::vector<TaskInstance> instances;
      if (!prompt_tasks.empty()) {
        instances = build_eval_instances(dataset, prompt_tasks, style, format, templates);
      } else {
        auto plan = preset_plan(prompt_preset, prompt_seed, parse_mix_strategy(prompt_strategy));
        std::vector<std::pair<Dataset, TaskSignature>> derived;
        for (const auto& e : plan.entries) {
          auto sig = signature_by_name(e.task);
          derived.emplace_back(derive_task(dataset, sig), sig);
        }
        instances = mix_multitask(derived, plan, format, style, templates);
      }
      write_instances(prompt_out, instances);
    } else if (infer_cmd->parsed()) {
      validate(infer_params);
      auto instances = read_instances(infer_instances);
      auto backend = make_backend(infer_backend, instances, infer_settings);
      write_file(infer_out,
                 outputs_to_jsonl(instances, run_inference(*backend, instances, infer_params)));
    } else if (eval_cmd->parsed()) {
      auto format = parse_answer_format(eval_format);
      std::vector<TaskInstance> instances;
      if (!eval_instances.empty()) {
        instances = read_instances(eval_instances);
      } else if (!eval_gold.empty()) {
        if (eval_tasks.empty()) throw Error(ErrorCode::InvalidValue, "--gold needs --task");
        auto dataset = read_dataset(eval_gold);
        if (!eval_split.empty()) dataset = filter_split(dataset, parse_split(eval_split));
        instances = build_eval_instances(dataset, eval_tasks, PromptStyle::prefix_instruction,
                                         format, PromptTemplates::defaults());
      } else {
        throw Error(ErrorCode::InvalidValue, "give --gold or --instances");
      }
      EvalOptions options;
      options.mode = parse_decode_mode(eval_mode);
      options.canonical.case_fold = !eval_no_fold;
      auto report = evaluate_task(instances, align_outputs(instances, read_outputs(eval_pred)),
                                  format, options);
      if (!eval_out.empty()) write_json_file(eval_out, to_json(report));
      detail::write_or_print(out, render_table(report), eval_table);
    } else if (analyze_cmd->parsed()) {
      auto report = eval_report_from_json(read_json_file(analyze_report));
      auto triage = analyze_run(report);
      std::filesystem::create_directories(analyze_out);
      const std::filesystem::path dir(analyze_out);
      write_json_file((dir / "triage.json").string(), to_json(triage));
      write_file((dir / "worksheet.jsonl").string(), to_jsonl(triage.worksheet()));
      write_file((dir / "worksheet.txt").string(), render_worksheet(triage));
      for (auto tag : kAllTags) out << to_string(tag) << " " << triage.counts[tag] << "\n";
    } else if (pipeline_cmd->parsed()) {
      auto config = pipeline_config_from_json(read_json_file(pipeline_config));
      if (!pipeline_out.empty()) config.output_dir = pipeline_out;
      if (pipeline_seed) config.seed = *pipeline_seed;
      if (!pipeline_backend.empty()) config.backend = pipeline_backend;
      run_pipeline(config, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_backend_code(e.code) ? kExitBackend : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace legoabsa
