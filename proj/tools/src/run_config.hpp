#pragma once

#include "scm/inference.hpp"
#include "scm/model.hpp"
#include "scm/scoring.hpp"
#include "scm/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scm::cli {

struct DataPaths {
  std::filesystem::path counts;
  std::optional<std::filesystem::path> populations;
  std::filesystem::path adjacency;
  std::filesystem::path output = "scm-output";
};

struct ForecastOptions {
  int horizon = 3;
  std::optional<std::filesystem::path> projected_populations;
};

struct HarnessOptions {
  std::vector<double> fractions;
  int band_length = 3;
  std::uint64_t mask_seed = 1;
  int horizon = 3;
  int max_folds = 6;
  int min_fit_years = 11;
  int threads = 1;
};

struct SimulateOptions {
  int rows = 3;
  int cols = 4;
  int years = 8;
  double population = 1e5;
  std::uint64_t seed = 1;
  std::map<std::string, double> hypers;
  SimulationOptions intercepts;
};

struct RunConfig {
  DataPaths data;
  ModelConfig model;
  FitSettings fit;
  ForecastOptions forecast;
  HarnessOptions harness;
  ScoringOptions scoring;
  SimulateOptions simulate;
  /// Raw text the config was parsed from, hashed into the manifest.
  std::string text;
};

/// Flat key = value file with [section] headers. Relative paths resolve
/// against `base_dir`. Unknown sections or keys are rejected.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace scm::cli
