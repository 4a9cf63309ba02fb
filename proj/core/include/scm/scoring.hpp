#pragma once

#include "scm/panel.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scm {

/// A cell that cannot be scored (zero observed rate, degenerate draws).
class ScoringError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |fitted - observed| / observed. Throws ScoringError when observed_rate <= 0.
double arb(double observed_rate, double fitted_rate_mean);

/// ((C - mean)/sd)^2 + 2 log sd with mean and sd (n - 1) of the draws.
/// Throws ScoringError for fewer than two draws or zero variance.
double dss(double observed_count, std::span<const double> predictive_draws);
double dss(double observed_count, double mean, double sd);

/// (u - l) + (2/beta)(l - r) 1{r < l} + (2/beta)(r - u) 1{r > u}.
/// Throws std::invalid_argument when lower > upper or beta is outside (0, 1).
double interval_score(double lower, double upper, double observed, double beta);

struct ScoringOptions {
  double beta = 0.05;
  /// Rates in reports and inside the interval score are per this many person-years.
  double rate_unit = 1e5;

  void validate() const;
};

struct CellScoreInputs {
  Cell cell;
  int calendar_year = 0;
  double observed_rate = 0.0;  // per person-year
  std::int64_t observed_count = 0;
  std::vector<double> rate_draws;   // fitted rates, per person-year
  std::vector<double> count_draws;  // predictive counts
};

struct CellScore {
  Cell cell;
  int calendar_year = 0;
  std::int64_t observed_count = 0;
  double observed_rate = 0.0;  // per rate_unit
  double fitted_mean = 0.0;    // per rate_unit
  double lower = 0.0;          // per rate_unit
  double upper = 0.0;          // per rate_unit
  std::optional<double> arb;
  std::optional<double> dss;
  std::optional<double> interval;
  std::string flag;  // empty when every metric was computed
  /// Grouping name -> key; a cell may belong to several keys of one grouping.
  std::multimap<std::string, std::string> groups;
};

CellScore score_cell(const CellScoreInputs& inputs, const ScoringOptions& options);

struct GroupAggregate {
  std::string grouping;
  std::string key;
  int cells = 0;
  int arb_cells = 0;
  int dss_cells = 0;
  int interval_cells = 0;
  double marb = 0.0;
  double dss = 0.0;
  double interval = 0.0;
};

struct ScoreReport {
  ScoringOptions options;
  std::vector<CellScore> cells;
  std::vector<GroupAggregate> aggregates;
  std::vector<std::string> warnings;

  /// Aggregates of one grouping, in key order.
  std::vector<GroupAggregate> grouping(const std::string& name) const;
};

/// Means of each metric over cells whose area is in `areas` and calendar year in
/// `years` (empty selects all), split by the keys of `grouping`. An empty
/// grouping name yields one aggregate with key "all". Cells missing a metric
/// are left out of that metric's mean only. Groups with no cells are omitted
/// with a warning.
std::vector<GroupAggregate> aggregate(const std::vector<CellScore>& cells, const std::vector<int>& areas,
                                      const std::vector<int>& years, const std::string& grouping,
                                      std::vector<std::string>* warnings = nullptr);

void write_cell_scores(std::ostream& out, const ScoreReport& report);
void write_aggregates(std::ostream& out, const ScoreReport& report);

}  // namespace scm
