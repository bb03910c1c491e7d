#include "uhoi/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "uhoi/error.hpp"
#include "uhoi/hash.hpp"

#ifndef UHOI_VERSION
#define UHOI_VERSION "0.0.0"
#endif

namespace uhoi {

std::string tool_version() { return UHOI_VERSION; }

RunManifest::RunManifest(const PipelineConfig& config)
    : config_(config.to_json()), config_hash_(config.hash()) {}

RunManifest RunManifest::open(const std::string& run_dir, const PipelineConfig& config) {
  const auto path = std::filesystem::path(run_dir) / "manifest.json";
  RunManifest m = std::filesystem::exists(path) ? load(path.string()) : RunManifest(config);
  m.config_ = config.to_json();
  m.config_hash_ = config.hash();
  m.version_ = tool_version();
  return m;
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  // ordered, so the stored config keeps its key order
  const auto doc = nlohmann::ordered_json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError(path + ": malformed JSON");
  RunManifest m;
  try {
    m.version_ = doc.at("tool_version").get<std::string>();
    m.config_ = doc.at("config");
    m.config_hash_ = doc.at("config_hash").get<std::string>();
    for (const auto& [name, s] : doc.at("stages").items()) {
      StageRecord r;
      r.input_hash = s.at("input_hash").get<std::string>();
      r.inputs = s.at("inputs").get<std::map<std::string, std::string>>();
      r.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      r.complete = s.at("complete").get<bool>();
      r.errors = s.at("errors").get<std::size_t>();
      m.stages_.emplace(name, std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": malformed manifest: " + e.what());
  }
  return m;
}

std::string RunManifest::compute_input_hash(const std::string& settings_hash,
                                            const std::vector<std::string>& inputs) {
  std::string material = settings_hash;
  for (const auto& path : inputs) material += "\n" + file_hash(path);
  return content_hash(material);
}

const StageRecord& RunManifest::record_stage(const std::string& stage,
                                             const std::string& settings_hash,
                                             const std::vector<std::string>& inputs,
                                             const std::vector<std::string>& outputs,
                                             bool complete, std::size_t errors) {
  StageRecord r;
  r.input_hash = compute_input_hash(settings_hash, inputs);
  for (const auto& p : inputs) r.inputs[p] = file_hash(p);
  for (const auto& p : outputs) {
    if (std::filesystem::exists(p)) r.outputs[p] = file_hash(p);
  }
  r.complete = complete;
  r.errors = errors;
  return stages_[stage] = std::move(r);
}

const StageRecord* RunManifest::stage(const std::string& name) const {
  auto it = stages_.find(name);
  return it == stages_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [name, r] : stages_) {
    stages[name] = {{"input_hash", r.input_hash},
                    {"inputs", r.inputs},
                    {"outputs", r.outputs},
                    {"complete", r.complete},
                    {"errors", r.errors}};
  }
  return {{"tool_version", version_},
          {"config_hash", config_hash_},
          {"config", config_},
          {"stages", stages}};
}

void RunManifest::save(const std::string& path) const {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp);
    out << to_json().dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace uhoi
