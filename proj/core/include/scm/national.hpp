#pragma once

#include "scm/inference.hpp"
#include "scm/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace scm {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct NationalYear {
  int year = 0;  // calendar year
  std::optional<std::int64_t> observed;
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double cil = 0.0;
  int draws = 0;
};

struct NationalSummary {
  std::vector<NationalYear> years;
  CountMatrix draws;  // draws x years
};

/// Column sums of the per-area draw table: out(s, y) = sum over `areas` of the
/// draw for (area, years[y], disease). Throws std::invalid_argument when any
/// requested (area, year) has no column in `counts`.
CountMatrix national_draws(const CountDraws& counts, const std::vector<int>& areas, const std::vector<int>& years,
                           Disease disease = Disease::Incidence);

/// Summary statistics of national draws; `years` are 0-based panel years.
NationalSummary summarize_national(const CountMatrix& draws, const ObservationPanel& panel,
                                   const std::vector<int>& areas, const std::vector<int>& years,
                                   Disease disease = Disease::Incidence);

/// Predictive counts for every requested area and year, summed per draw.
/// Empty `areas` or `years` select all of them.
NationalSummary national_distribution(const PosteriorSamples& samples, const ObservationPanel& panel,
                                      std::uint64_t seed, std::vector<int> areas = {}, std::vector<int> years = {},
                                      Disease disease = Disease::Incidence);

void write_national(std::ostream& out, const NationalSummary& summary);

}  // namespace scm
