#pragma once

#include "scm/panel.hpp"
#include "scm/simulate.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>

namespace scm {

/// Malformed input; the message names the source and row where possible.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Disease d);
Disease parse_disease(std::string_view text);

struct PanelLoadReport {
  int rows = 0;
  int missing_cells = 0;
  std::int64_t total_count[kNumDiseases] = {0, 0};
};

/// (area, calendar year, disease) -> population.
using PopulationTable = std::map<std::tuple<int, int, Disease>, double>;

/// CSV columns area_id, year, disease, population.
PopulationTable read_populations(std::istream& in, const std::string& source = "populations");
PopulationTable load_populations(const std::filesystem::path& path);

PopulationProjection projection_from(const PopulationTable& table);

/// CSV columns area_id, year, disease, count, population. Area ids are
/// 0-based and dense; years form a contiguous range; every (area, year,
/// disease) appears exactly once. An empty count is a missing cell. The
/// population column may be empty or absent when `populations` supplies it.
ObservationPanel read_panel(std::istream& counts, const PopulationTable* populations = nullptr,
                            PanelLoadReport* report = nullptr, const std::string& source = "counts");
ObservationPanel load_panel(const std::filesystem::path& counts_path,
                            const std::optional<std::filesystem::path>& population_path = std::nullopt,
                            PanelLoadReport* report = nullptr);

void write_panel(std::ostream& out, const ObservationPanel& panel);

/// Hyperparameters, latent field and rates of a simulated panel.
void write_truth(std::ostream& out, const SimulationTruth& truth, int first_year);

}  // namespace scm
