#include "e2e.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cli.hpp"
#include "instances.hpp"

namespace fixtures {

std::string e2e_golden_path() { return fixture_path("e2e/golden_report.json"); }

std::string run_e2e_pipeline(const std::string& run_dir, std::ostream& log) {
  std::filesystem::remove_all(run_dir);
  const std::string e2e = fixture_path("e2e");
  const std::vector<std::string> common = {"-c", e2e + "/config.json"};
  const std::vector<std::vector<std::string>> steps = {
      {"pairs", "--annotations", e2e + "/annotations.json", "--vocab", e2e + "/vocab.txt",
       "--images", e2e + "/images", "--run", run_dir},
      {"generate", "--run", run_dir, "--images", e2e + "/images"},
      {"evaluate", "--annotations", e2e + "/annotations.json", "--vocab", e2e + "/vocab.txt",
       "--split", e2e + "/split.json", "--class-mode", "hoi", "--run", run_dir, "--name",
       "anyhoi-tt"},
  };
  for (const auto& step : steps) {
    std::vector<std::string> args = step;
    args.insert(args.end(), common.begin(), common.end());
    const int rc = uhoi::cli::run(args, log, log);
    if (rc != 0) {
      throw std::runtime_error("uhoi " + step.front() + " exited with " + std::to_string(rc));
    }
  }
  return run_dir + "/report.json";
}

}  // namespace fixtures
