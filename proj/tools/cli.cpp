#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "uhoi/config.hpp"
#include "uhoi/error.hpp"
#include "uhoi/manifest.hpp"
#include "uhoi/pipeline.hpp"
#include "uhoi/report.hpp"
#include "uhoi/text.hpp"

namespace uhoi::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string protocol;
  std::string thresholds;
  std::string class_mode;
  std::optional<int> num_generations;
  std::optional<int> top_k;
  std::optional<std::uint64_t> seed;
  std::string aggregation;
  std::string prompt_kind;
  std::string visual_mode;
  std::string extractor;
  std::string embeddings;
  std::string mock_pool;
  bool verbose = false;
};

struct Options {
  CommonOptions common;
  std::string run_dir;
  std::string annotations;
  std::string vocab;
  std::string images;
  std::string split;
  std::string predictions;
  std::string out_dir;
  std::string name;
  bool persist_prompts = false;
  bool overwrite = false;
  std::vector<std::string> reports;
  std::string csv_out;
  std::string plot_out;
  std::string table_out;
  std::string candidates;
  std::string replies;
  std::string verbs_out;
};

void add_common(CLI::App& app, CommonOptions& o) {
  app.add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "Override a config key, e.g. --set eval.iou_threshold=0.5")
      ->take_all();
  app.add_option("--protocol", o.protocol, "annotated | computed");
  app.add_option("--thresholds", o.thresholds, "Comma-separated similarity thresholds");
  app.add_option("--class-mode", o.class_mode, "verb | hoi");
  app.add_option("-N,--num-generations", o.num_generations, "Generations per pair");
  app.add_option("-k,--top-k", o.top_k, "Triplets kept per pair");
  app.add_option("--seed", o.seed, "Run seed");
  app.add_option("--aggregation", o.aggregation, "topk | sampling");
  app.add_option("--prompt", o.prompt_kind, "direct | cot | descriptive | structured");
  app.add_option("--visual-mode", o.visual_mode, "crop | red_circle | reverse_blur | crop_mask | blind");
  app.add_option("--extractor", o.extractor, "auto | rule_based | t2g | structured");
  app.add_option("--embeddings", o.embeddings, "Embedding TSV file (sets embeddings.kind=tsv)");
  app.add_option("--mock-pool", o.mock_pool, "Mock generation pool (sets provider.kind=mock)");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

PipelineConfig build_config(const CommonOptions& o) {
  PipelineConfig config = o.config_path.empty() ? PipelineConfig() : PipelineConfig::load(o.config_path);
  if (!o.protocol.empty()) apply_override(config, "eval.protocol=" + quoted(o.protocol));
  if (!o.thresholds.empty()) {
    std::string list = o.thresholds;
    std::replace(list.begin(), list.end(), ';', ',');
    apply_override(config, "eval.thresholds=[" + list + "]");
  }
  if (!o.class_mode.empty()) apply_override(config, "eval.class_mode=" + quoted(o.class_mode));
  if (o.num_generations) apply_override(config, "num_generations=" + std::to_string(*o.num_generations));
  if (o.top_k) apply_override(config, "top_k=" + std::to_string(*o.top_k));
  if (o.seed) apply_override(config, "seed=" + std::to_string(*o.seed));
  if (!o.aggregation.empty()) apply_override(config, "aggregation=" + quoted(o.aggregation));
  if (!o.prompt_kind.empty()) apply_override(config, "prompt_kind=" + quoted(o.prompt_kind));
  if (!o.visual_mode.empty()) apply_override(config, "visual_mode=" + quoted(o.visual_mode));
  if (!o.extractor.empty()) apply_override(config, "extractor=" + quoted(o.extractor));
  if (!o.embeddings.empty()) {
    apply_override(config, "embeddings.kind=\"tsv\"");
    apply_override(config, "embeddings.path=" + quoted(o.embeddings));
  }
  if (!o.mock_pool.empty()) {
    apply_override(config, "provider.kind=\"mock\"");
    apply_override(config, "provider.mock_pool=" + quoted(o.mock_pool));
  }
  for (const auto& s : o.overrides) apply_override(config, s);
  config.validate();
  return config;
}

int report_summary(const StageSummary& s, std::ostream& out) {
  out << s.stage << ": " << s.processed << " processed";
  if (!s.issues.empty()) out << ", " << s.issues.size() << " error(s)";
  if (!s.complete) out << ", incomplete";
  out << '\n';
  for (const auto& issue : s.issues) spdlog::error("{}: {}: {}", s.stage, issue.subject, issue.message);
  if (!s.hint.empty()) spdlog::warn("{}: {}", s.stage, s.hint);
  return s.ok() ? 0 : 1;
}

VerbVocabulary load_vocab(const Options& o, const PipelineConfig& config) {
  return VerbVocabulary::load(o.vocab, fs::path(o.vocab).filename().string(),
                              VerbNormalization{config.lemmatize});
}

int cmd_pairs(const Options& o, std::ostream& out) {
  const auto config = build_config(o.common);
  const RunPaths paths{o.run_dir};
  fs::create_directories(paths.dir);
  const auto vocab = load_vocab(o, config);
  const auto samples = load_annotations(o.annotations, config.eval.protocol, vocab);
  auto result = run_pairs(config, samples, o.images, o.persist_prompts ? paths.prompts() : "");
  write_pairs(paths.pairs(), result.pairs);
  auto manifest = RunManifest::open(paths.dir, config);
  manifest.record_stage("pairs", config.pairs_hash(), {o.annotations, o.vocab}, {paths.pairs()},
                        result.summary.ok(), result.summary.issues.size());
  manifest.save(paths.manifest());
  out << result.pairs.size() << " pairs written to " << paths.pairs() << '\n';
  return report_summary(result.summary, out);
}

int cmd_generate(const Options& o, std::ostream& out) {
  const auto config = build_config(o.common);
  const RunPaths paths{o.run_dir};
  if (!fs::exists(paths.pairs())) {
    throw ConfigError("no pairs in " + paths.dir + "; run 'uhoi pairs' first");
  }
  auto manifest = RunManifest::open(paths.dir, config);
  const auto input_hash =
      RunManifest::compute_input_hash(config.generation_hash(), {paths.pairs()});
  const auto* previous = manifest.stage("generate");
  if (fs::exists(paths.transcript()) && fs::file_size(paths.transcript()) > 0 && previous &&
      previous->input_hash != input_hash) {
    if (!o.overwrite) {
      throw ConfigError("the transcript in " + paths.dir +
                        " was generated with different settings; pass --overwrite to discard it");
    }
    fs::remove(paths.transcript());
  }
  const auto pairs = read_pairs(paths.pairs());
  auto provider = make_generation_provider(config);
  // Record the inputs before generating so an interrupted run can resume.
  manifest.record_stage("generate", config.generation_hash(), {paths.pairs()},
                        {paths.transcript()}, false, 0);
  manifest.save(paths.manifest());
  const auto summary = run_generate(config, pairs, *provider, o.images, paths.transcript());
  manifest.record_stage("generate", config.generation_hash(), {paths.pairs()},
                        {paths.transcript()}, summary.ok(), summary.issues.size());
  manifest.save(paths.manifest());
  return report_summary(summary, out);
}

ExtractStageResult extract_run(const PipelineConfig& config, const RunPaths& paths,
                               std::vector<PairRecord>& pairs) {
  if (!fs::exists(paths.pairs()) || !fs::exists(paths.transcript())) {
    throw ConfigError(paths.dir + " lacks pairs.jsonl or transcript.jsonl");
  }
  pairs = read_pairs(paths.pairs());
  const auto transcript = read_transcript(paths.transcript());
  auto t2g = make_t2g_provider(config);
  std::unique_ptr<Similarity> object_sim;
  if (config.object_match == ObjectMatchMode::kSimilarity) object_sim = make_similarity(config);
  ExtractionResources resources;
  resources.t2g = t2g.get();
  resources.object_similarity = object_sim.get();
  return run_extract(config, pairs, transcript.records, resources, paths.triplets(),
                     paths.selections());
}

int cmd_extract(const Options& o, std::ostream& out) {
  const auto config = build_config(o.common);
  const RunPaths paths{o.run_dir};
  std::vector<PairRecord> pairs;
  const auto result = extract_run(config, paths, pairs);
  auto manifest = RunManifest::open(paths.dir, config);
  manifest.record_stage("extract", config.extraction_hash(), {paths.pairs(), paths.transcript()},
                        {paths.triplets(), paths.selections()}, result.summary.ok(),
                        result.summary.issues.size());
  manifest.save(paths.manifest());
  return report_summary(result.summary, out);
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto config = build_config(o.common);
  if (o.predictions.empty() && o.run_dir.empty()) {
    throw ConfigError("evaluate needs --predictions or --run");
  }
  const std::string out_dir = !o.out_dir.empty() ? o.out_dir : o.run_dir;
  if (out_dir.empty()) throw ConfigError("evaluate needs --out when only --predictions is given");
  fs::create_directories(out_dir);
  const RunPaths out_paths{out_dir};

  const auto vocab = load_vocab(o, config);
  const auto samples = load_annotations(o.annotations, config.eval.protocol, vocab);
  std::optional<RaritySplit> split;
  if (!o.split.empty()) split = RaritySplit::load(o.split);

  StageSummary summary;
  summary.stage = "evaluate";
  PredictionMap predictions;
  std::vector<std::string> inputs{o.annotations, o.vocab};
  std::string source;
  if (!o.predictions.empty()) {
    predictions = load_predictions(o.predictions);
    inputs.push_back(o.predictions);
    source = "predictions";
  } else {
    const RunPaths paths{o.run_dir};
    std::vector<PairRecord> pairs;
    auto extracted = extract_run(config, paths, pairs);
    report_summary(extracted.summary, out);
    summary.issues = extracted.summary.issues;
    predictions = predictions_from_selections(pairs, extracted.selections);
    write_text_file(out_paths.predictions(), predictions_to_json(predictions).dump(2) + "\n");
    inputs.push_back(paths.pairs());
    inputs.push_back(paths.transcript());
    source = "transcript";
  }
  if (split) inputs.push_back(o.split);

  auto sim = make_similarity(config);
  const auto report = evaluate_dataset(samples, predictions, vocab, *sim, config.eval,
                                       split ? &*split : nullptr, config.lemmatize, &summary);
  const std::string name = !o.name.empty() ? o.name : fs::path(out_dir).filename().string();
  const auto doc = report_to_json(report, report_meta(config, name, source));
  write_text_file(out_paths.report_json(), doc.dump(2) + "\n");
  const NamedReport named{name, report, nlohmann::json::parse(doc["run"].dump())};
  write_text_file(out_paths.report_csv(), render_csv({named}));
  out << render_table({named});

  auto manifest = RunManifest::open(out_dir, config);
  manifest.record_stage("evaluate", config.evaluation_hash(), inputs,
                        {out_paths.report_json(), out_paths.report_csv()}, summary.ok(),
                        summary.issues.size());
  manifest.save(out_paths.manifest());
  return report_summary(summary, out);
}

int cmd_report(const Options& o, std::ostream& out) {
  std::vector<NamedReport> reports;
  for (const auto& path : o.reports) reports.push_back(load_named_report(path));
  const auto table = render_table(reports);
  out << table;
  if (!o.table_out.empty()) write_text_file(o.table_out, table);
  if (!o.csv_out.empty()) write_text_file(o.csv_out, render_csv(reports));
  if (!o.plot_out.empty()) write_text_file(o.plot_out, render_generations_plot(reports));
  return 0;
}

int cmd_filter_verbs(const Options& o, std::ostream& out) {
  const auto config = build_config(o.common);
  std::ifstream in(o.candidates);
  if (!in) throw ParseError("cannot open " + o.candidates);
  std::vector<std::string> candidates;
  std::string line;
  while (std::getline(in, line)) {
    const auto verb = trim(line);
    if (!verb.empty() && verb.front() != '#') candidates.push_back(verb);
  }
  std::unique_ptr<YesNoProvider> provider;
  if (!o.replies.empty()) {
    provider = std::make_unique<MockYesNoProvider>(MockYesNoProvider::load(o.replies));
  } else {
    if (config.provider.kind != "chat") {
      throw ConfigError("filter-verbs needs --replies or a chat provider in the config");
    }
    ChatCompletionsConfig chat;
    chat.endpoint = {config.provider.url, config.provider.api_key_env,
                     std::chrono::seconds(config.provider.timeout_seconds)};
    chat.model = config.provider.model;
    chat.retry.max_retries = config.provider.max_retries;
    provider = std::make_unique<ChatCompletionsProvider>(std::move(chat));
  }
  const auto result = filter_wordnet_verbs(candidates, *provider);
  std::string accepted;
  for (const auto& v : result.accepted) accepted += v + "\n";
  write_text_file(o.verbs_out, accepted);
  out << "filter-verbs: " << result.accepted.size() << " accepted, " << result.rejected.size()
      << " rejected, " << result.undecided.size() << " undecided\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("uhoi", sink);
  logger->set_pattern("[%l] %v");
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  CLI::App app{"Unconstrained HOI evaluation and generation pipeline", "uhoi"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Options o;

  auto* pairs = app.add_subcommand("pairs", "Build human-object pairs from annotations");
  add_common(*pairs, o.common);
  pairs->add_option("--annotations", o.annotations, "Annotation JSON")->required()->check(CLI::ExistingFile);
  pairs->add_option("--vocab", o.vocab, "Verb vocabulary file")->required()->check(CLI::ExistingFile);
  pairs->add_option("--images", o.images, "Image directory")->check(CLI::ExistingDirectory);
  pairs->add_option("--run", o.run_dir, "Run directory")->required();
  pairs->add_flag("--persist-prompts", o.persist_prompts, "Save rendered visual prompts");

  auto* generate = app.add_subcommand("generate", "Sample N generations per pair");
  add_common(*generate, o.common);
  generate->add_option("--run", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  generate->add_option("--images", o.images, "Image directory")->check(CLI::ExistingDirectory);
  generate->add_flag("--overwrite", o.overwrite, "Discard a transcript made with other settings");

  auto* extract = app.add_subcommand("extract", "Extract, refine and aggregate triplets");
  add_common(*extract, o.common);
  extract->add_option("--run", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  auto* evaluate = app.add_subcommand("evaluate", "Compute mAP and Semantic Recall");
  add_common(*evaluate, o.common);
  evaluate->add_option("--annotations", o.annotations, "Annotation JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--vocab", o.vocab, "Verb vocabulary file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", o.split, "Rare/non-rare split JSON")->check(CLI::ExistingFile);
  auto* pred_opt = evaluate->add_option("--predictions", o.predictions, "Precomputed predictions JSON")
                       ->check(CLI::ExistingFile);
  evaluate->add_option("--run", o.run_dir, "Run directory with a transcript")
      ->check(CLI::ExistingDirectory)
      ->excludes(pred_opt);
  evaluate->add_option("--out", o.out_dir, "Output directory (default: the run directory)");
  evaluate->add_option("--name", o.name, "Method name in the report");

  auto* report = app.add_subcommand("report", "Tabulate and plot reports");
  report->add_option("reports", o.reports, "report.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--csv", o.csv_out, "Write the table as CSV");
  report->add_option("--plot", o.plot_out, "Write an SVG of mAP Avg. vs number of generations");
  report->add_option("--out", o.table_out, "Write the text table");

  auto* filter = app.add_subcommand("filter-verbs", "Keep candidate verbs a person can do to an object");
  add_common(*filter, o.common);
  filter->add_option("--candidates", o.candidates, "Newline-delimited verbs")->required()->check(CLI::ExistingFile);
  filter->add_option("--replies", o.replies, "Mock replies JSON (verb -> reply)")->check(CLI::ExistingFile);
  filter->add_option("--out", o.verbs_out, "Accepted verbs output file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  spdlog::set_level(o.common.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*pairs) return cmd_pairs(o, out);
    if (*generate) return cmd_generate(o, out);
    if (*extract) return cmd_extract(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*report) return cmd_report(o, out);
    if (*filter) return cmd_filter_verbs(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace uhoi::cli
