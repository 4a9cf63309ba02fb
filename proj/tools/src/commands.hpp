#pragma once

#include "run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace scm::cli {

struct Overrides {
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<int> burn_in;
  std::optional<int> thin;
  std::optional<int> horizon;
  std::optional<std::string> mode;
};

/// Applies SCM_OUTPUT_DIR, then explicit overrides.
void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Each command writes its files plus manifest.json into the output
/// directory and returns the list of files written. On failure every file it
/// created is removed before the exception propagates.
std::vector<std::filesystem::path> run_fit(const RunConfig& config);
std::vector<std::filesystem::path> run_forecast(const RunConfig& config);
std::vector<std::filesystem::path> run_validate(const RunConfig& config);
std::vector<std::filesystem::path> run_national(const RunConfig& config);
std::vector<std::filesystem::path> run_simulate(const RunConfig& config);

/// Parses argv and dispatches; returns the process exit status.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace scm::cli
