#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uhoi/metrics.hpp"

namespace uhoi {

struct NamedReport {
  std::string name;
  MetricReport report;
  nlohmann::json run;  // the report's "run" block
};

// Name comes from run.name, falling back to the file stem.
NamedReport load_named_report(const std::string& path);

// Differences of each report against the first; empty when all can share a table.
std::vector<std::string> report_incompatibilities(const std::vector<NamedReport>& reports);

// Both throw ConfigError listing the incompatibilities. Values are x100.
std::string render_table(const std::vector<NamedReport>& reports);
std::string render_csv(const std::vector<NamedReport>& reports);

// Static SVG of mAP Avg (x100) against run.num_generations, one point per
// report, sorted by N. Throws ConfigError if a report lacks num_generations.
std::string render_generations_plot(const std::vector<NamedReport>& reports);

}  // namespace uhoi
