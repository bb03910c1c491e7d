#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/config.hpp"

namespace uhoi {

std::string tool_version();

struct StageRecord {
  // Hash over the stage settings hash and every input file hash.
  std::string input_hash;
  std::map<std::string, std::string> inputs;   // path -> content hash
  std::map<std::string, std::string> outputs;  // path -> content hash
  bool complete = false;
  std::size_t errors = 0;
};

// run/manifest.json: the frozen config, its hash, and one record per stage.
class RunManifest {
 public:
  RunManifest() = default;
  explicit RunManifest(const PipelineConfig& config);

  // Loads <run_dir>/manifest.json if present, else starts a fresh one. The
  // stored config is replaced by `config`.
  static RunManifest open(const std::string& run_dir, const PipelineConfig& config);
  static RunManifest load(const std::string& path);

  // Hashes the files now and stores the record under `stage`. `settings_hash`
  // covers the config fields the stage depends on.
  const StageRecord& record_stage(const std::string& stage, const std::string& settings_hash,
                                  const std::vector<std::string>& inputs,
                                  const std::vector<std::string>& outputs, bool complete,
                                  std::size_t errors);
  static std::string compute_input_hash(const std::string& settings_hash,
                                        const std::vector<std::string>& inputs);

  const StageRecord* stage(const std::string& name) const;
  const std::string& config_hash() const { return config_hash_; }
  const nlohmann::ordered_json& config() const { return config_; }
  const std::string& version() const { return version_; }

  nlohmann::ordered_json to_json() const;
  void save(const std::string& path) const;

 private:
  std::string version_ = tool_version();
  nlohmann::ordered_json config_;
  std::string config_hash_;
  std::map<std::string, StageRecord> stages_;
};

}  // namespace uhoi
