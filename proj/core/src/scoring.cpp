#include "scm/scoring.hpp"

#include "scm/csv.hpp"
#include "scm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace scm {

double arb(double observed_rate, double fitted_rate_mean) {
  if (!(observed_rate > 0.0)) throw ScoringError("arb: observed rate must be positive");
  return std::abs(fitted_rate_mean - observed_rate) / observed_rate;
}

double dss(double observed_count, double mean, double sd) {
  if (!(sd > 0.0)) throw ScoringError("dss: predictive standard deviation is zero");
  const double z = (observed_count - mean) / sd;
  return z * z + 2.0 * std::log(sd);
}

double dss(double observed_count, std::span<const double> predictive_draws) {
  if (predictive_draws.size() < 2) throw ScoringError("dss: at least two draws are required");
  return dss(observed_count, mean(predictive_draws), sample_sd(predictive_draws));
}

double interval_score(double lower, double upper, double observed, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("interval_score: beta must lie in (0, 1)");
  if (lower > upper) throw std::invalid_argument("interval_score: lower bound exceeds upper bound");
  double score = upper - lower;
  if (observed < lower) score += (2.0 / beta) * (lower - observed);
  if (observed > upper) score += (2.0 / beta) * (observed - upper);
  return score;
}

void ScoringOptions::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(rate_unit > 0.0)) throw std::invalid_argument("rate_unit must be positive");
}

CellScore score_cell(const CellScoreInputs& in, const ScoringOptions& options) {
  if (in.rate_draws.empty()) throw std::invalid_argument("score_cell: no fitted-rate draws");
  CellScore out;
  out.cell = in.cell;
  out.calendar_year = in.calendar_year;
  out.observed_count = in.observed_count;
  out.observed_rate = in.observed_rate * options.rate_unit;

  std::vector<double> rates = in.rate_draws;
  for (double& r : rates) r *= options.rate_unit;
  std::sort(rates.begin(), rates.end());
  out.fitted_mean = mean(rates);
  out.lower = quantile_sorted(rates, options.beta / 2.0);
  out.upper = quantile_sorted(rates, 1.0 - options.beta / 2.0);

  std::vector<std::string> flags;
  if (in.observed_rate > 0.0) {
    out.arb = arb(out.observed_rate, out.fitted_mean);
  } else {
    flags.emplace_back("zero_rate");
  }
  out.interval = interval_score(out.lower, out.upper, out.observed_rate, options.beta);
  try {
    out.dss = dss(static_cast<double>(in.observed_count), in.count_draws);
  } catch (const ScoringError&) {
    flags.emplace_back("degenerate_predictive");
  }
  for (std::size_t k = 0; k < flags.size(); ++k) out.flag += (k ? ";" : "") + flags[k];
  return out;
}

std::vector<GroupAggregate> ScoreReport::grouping(const std::string& name) const {
  std::vector<GroupAggregate> out;
  for (const auto& a : aggregates) {
    if (a.grouping == name) out.push_back(a);
  }
  return out;
}

std::vector<GroupAggregate> aggregate(const std::vector<CellScore>& cells, const std::vector<int>& areas,
                                      const std::vector<int>& years, const std::string& grouping,
                                      std::vector<std::string>* warnings) {
  const std::set<int> area_set(areas.begin(), areas.end());
  const std::set<int> year_set(years.begin(), years.end());
  struct Acc {
    GroupAggregate agg;
    double arb_sum = 0.0;
    double dss_sum = 0.0;
    double is_sum = 0.0;
  };
  std::map<std::string, Acc> groups;
  auto add = [](Acc& acc, const CellScore& c) {
    ++acc.agg.cells;
    if (c.arb) {
      ++acc.agg.arb_cells;
      acc.arb_sum += *c.arb;
    }
    if (c.dss) {
      ++acc.agg.dss_cells;
      acc.dss_sum += *c.dss;
    }
    if (c.interval) {
      ++acc.agg.interval_cells;
      acc.is_sum += *c.interval;
    }
  };
  for (const auto& c : cells) {
    if (!area_set.empty() && !area_set.count(c.cell.area)) continue;
    if (!year_set.empty() && !year_set.count(c.calendar_year)) continue;
    if (grouping.empty()) {
      add(groups["all"], c);
      continue;
    }
    const auto range = c.groups.equal_range(grouping);
    for (auto it = range.first; it != range.second; ++it) add(groups[it->second], c);
  }

  std::vector<GroupAggregate> out;
  for (auto& [key, acc] : groups) {
    acc.agg.grouping = grouping.empty() ? "all" : grouping;
    acc.agg.key = key;
    acc.agg.marb = acc.agg.arb_cells ? acc.arb_sum / acc.agg.arb_cells : std::nan("");
    acc.agg.dss = acc.agg.dss_cells ? acc.dss_sum / acc.agg.dss_cells : std::nan("");
    acc.agg.interval = acc.agg.interval_cells ? acc.is_sum / acc.agg.interval_cells : std::nan("");
    out.push_back(acc.agg);
  }
  if (out.empty() && warnings) {
    warnings->push_back("grouping '" + (grouping.empty() ? std::string("all") : grouping) + "' has no cells");
  }
  return out;
}

namespace {

void write_header_comment(std::ostream& out, const ScoringOptions& options) {
  out << "# rate_unit=" << format_number(options.rate_unit) << " beta=" << format_number(options.beta) << '\n';
}

std::string join_groups(const std::multimap<std::string, std::string>& groups) {
  std::string out;
  for (const auto& [name, key] : groups) {
    if (!out.empty()) out += ';';
    out += name + '=' + key;
  }
  return out;
}

}  // namespace

void write_cell_scores(std::ostream& out, const ScoreReport& report) {
  write_header_comment(out, report.options);
  out << "area,year,disease,observed_count,observed_rate,fitted_mean,lower,upper,arb,dss,is,flag,groups\n";
  for (const auto& c : report.cells) {
    out << c.cell.area << ',' << c.calendar_year << ','
        << (c.cell.disease == Disease::Incidence ? "incidence" : "mortality") << ',' << c.observed_count << ','
        << format_number(c.observed_rate) << ',' << format_number(c.fitted_mean) << ','
        << format_number(c.lower) << ',' << format_number(c.upper) << ',' << format_optional(c.arb) << ','
        << format_optional(c.dss) << ',' << format_optional(c.interval) << ',' << c.flag << ','
        << join_groups(c.groups) << '\n';
  }
}

void write_aggregates(std::ostream& out, const ScoreReport& report) {
  write_header_comment(out, report.options);
  out << "grouping,key,cells,marb,dss,is,arb_cells,dss_cells,is_cells\n";
  for (const auto& a : report.aggregates) {
    out << a.grouping << ',' << a.key << ',' << a.cells << ',' << format_number(a.marb) << ','
        << format_number(a.dss) << ',' << format_number(a.interval) << ',' << a.arb_cells << ','
        << a.dss_cells << ',' << a.interval_cells << '\n';
  }
}

}  // namespace scm
