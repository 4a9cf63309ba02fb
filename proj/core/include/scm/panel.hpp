#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace scm {

enum class Disease : int { Incidence = 0, Mortality = 1 };

inline constexpr int kNumDiseases = 2;

/// One (area, year, disease) cell; `year` is the 0-based index into the panel.
struct Cell {
  int area = 0;
  int year = 0;
  Disease disease = Disease::Incidence;

  bool operator==(const Cell&) const = default;
};

/// Dense counts and populations over areas x years x {incidence, mortality}.
///
/// Cell storage index is (d * T + t) * A + i, matching the rows of the model
/// design matrix.
class ObservationPanel {
 public:
  ObservationPanel() = default;

  /// All counts start missing; populations start at 1.
  ObservationPanel(int num_areas, int num_years, int first_year = 0);

  int num_areas() const { return num_areas_; }
  int num_years() const { return num_years_; }
  int first_year() const { return first_year_; }
  int num_cells() const { return kNumDiseases * num_areas_ * num_years_; }

  int index(int area, int year, Disease d) const {
    return (static_cast<int>(d) * num_years_ + year) * num_areas_ + area;
  }
  int index(const Cell& c) const { return index(c.area, c.year, c.disease); }
  Cell cell(int index) const;

  bool observed(int area, int year, Disease d) const { return observed_[index(area, year, d)] != 0; }
  bool observed(int idx) const { return observed_[idx] != 0; }
  std::optional<std::int64_t> count(int area, int year, Disease d) const;
  std::int64_t count_at(int idx) const { return counts_[idx]; }
  double population(int area, int year, Disease d) const { return populations_[index(area, year, d)]; }
  double population_at(int idx) const { return populations_[idx]; }

  /// Rejects negative counts.
  void set_count(int area, int year, Disease d, std::int64_t value);
  void set_missing(int area, int year, Disease d);
  /// Rejects non-positive populations.
  void set_population(int area, int year, Disease d, double value);

  int num_observed() const;
  int num_observed(Disease d) const;

  /// Throws if any population is non-positive.
  void validate() const;

  /// Copy restricted to the first `num_years` years.
  ObservationPanel truncated(int num_years) const;

  bool operator==(const ObservationPanel&) const = default;

 private:
  int num_areas_ = 0;
  int num_years_ = 0;
  int first_year_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::uint8_t> observed_;
  std::vector<double> populations_;
};

/// Population at risk for a cell outside the observed window, keyed by the
/// calendar year. Returning nullopt means the projection is unavailable.
using PopulationProjection = std::function<std::optional<double>(int area, int calendar_year, Disease d)>;

/// Appends `horizon` years with all counts missing. Throws if the projection
/// lacks any required population.
ObservationPanel extend_panel(const ObservationPanel& panel, int horizon,
                              const PopulationProjection& projection);

}  // namespace scm
