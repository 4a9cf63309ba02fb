#include "scm/national.hpp"

#include "scm/csv.hpp"
#include "scm/stats.hpp"

#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace scm {

CountMatrix national_draws(const CountDraws& counts, const std::vector<int>& areas, const std::vector<int>& years,
                           Disease disease) {
  std::map<std::pair<int, int>, Eigen::Index> column;
  for (std::size_t c = 0; c < counts.cells.size(); ++c) {
    const Cell& cell = counts.cells[c];
    if (cell.disease == disease) column[{cell.area, cell.year}] = static_cast<Eigen::Index>(c);
  }
  CountMatrix out = CountMatrix::Zero(counts.counts.rows(), static_cast<Eigen::Index>(years.size()));
  for (std::size_t y = 0; y < years.size(); ++y) {
    for (int area : areas) {
      const auto it = column.find({area, years[y]});
      if (it == column.end()) {
        throw std::invalid_argument("national_draws: no draws for area " + std::to_string(area) + " in year index " +
                                    std::to_string(years[y]));
      }
      out.col(static_cast<Eigen::Index>(y)) += counts.counts.col(it->second);
    }
  }
  return out;
}

NationalSummary summarize_national(const CountMatrix& draws, const ObservationPanel& panel,
                                   const std::vector<int>& areas, const std::vector<int>& years, Disease disease) {
  if (draws.rows() < 1) throw std::invalid_argument("summarize_national: no draws");
  NationalSummary out;
  out.draws = draws;
  for (std::size_t y = 0; y < years.size(); ++y) {
    NationalYear row;
    row.year = panel.first_year() + years[y];
    row.draws = static_cast<int>(draws.rows());
    std::int64_t total = 0;
    bool complete = true;
    for (int area : areas) {
      const auto c = panel.count(area, years[y], disease);
      if (!c) {
        complete = false;
        break;
      }
      total += *c;
    }
    if (complete) row.observed = total;
    std::vector<double> values(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index s = 0; s < draws.rows(); ++s) {
      values[static_cast<std::size_t>(s)] = static_cast<double>(draws(s, static_cast<Eigen::Index>(y)));
    }
    row.mean = mean(values);
    row.q025 = quantile(values, 0.025);
    row.q975 = quantile(values, 0.975);
    row.cil = row.q975 - row.q025;
    out.years.push_back(row);
  }
  return out;
}

NationalSummary national_distribution(const PosteriorSamples& samples, const ObservationPanel& panel,
                                      std::uint64_t seed, std::vector<int> areas, std::vector<int> years,
                                      Disease disease) {
  if (areas.empty()) {
    areas.resize(static_cast<std::size_t>(panel.num_areas()));
    std::iota(areas.begin(), areas.end(), 0);
  }
  if (years.empty()) {
    years.resize(static_cast<std::size_t>(panel.num_years()));
    std::iota(years.begin(), years.end(), 0);
  }
  std::vector<Cell> cells;
  for (int t : years) {
    for (int i : areas) {
      if (i < 0 || i >= panel.num_areas() || t < 0 || t >= panel.num_years()) {
        throw std::invalid_argument("national_distribution: area or year outside the panel");
      }
      cells.push_back({i, t, disease});
    }
  }
  const CountDraws counts = predictive_counts(samples, panel, cells, seed);
  return summarize_national(national_draws(counts, areas, years, disease), panel, areas, years, disease);
}

void write_national(std::ostream& out, const NationalSummary& summary) {
  out << "year,observed,mean,q025,q975,cil\n";
  for (const auto& y : summary.years) {
    out << y.year << ',' << (y.observed ? std::to_string(*y.observed) : std::string()) << ','
        << format_number(y.mean) << ',' << format_number(y.q025) << ',' << format_number(y.q975) << ','
        << format_number(y.cil) << '\n';
  }
}

}  // namespace scm
