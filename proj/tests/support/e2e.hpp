#pragma once

#include <iosfwd>
#include <string>

namespace fixtures {

// Runs pairs -> generate -> evaluate on the five-image fixture through the
// command-line entry point, writing into `run_dir` (created fresh). Returns
// the path of report.json; throws std::runtime_error on a non-zero exit.
std::string run_e2e_pipeline(const std::string& run_dir, std::ostream& log);

std::string e2e_golden_path();

}  // namespace fixtures
