#include "scm/panel.hpp"

#include <stdexcept>
#include <string>

namespace scm {

ObservationPanel::ObservationPanel(int num_areas, int num_years, int first_year)
    : num_areas_(num_areas), num_years_(num_years), first_year_(first_year) {
  if (num_areas < 1 || num_years < 1) {
    throw std::invalid_argument("ObservationPanel: dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(num_cells());
  counts_.assign(n, 0);
  observed_.assign(n, 0);
  populations_.assign(n, 1.0);
}

Cell ObservationPanel::cell(int idx) const {
  const int area = idx % num_areas_;
  const int rest = idx / num_areas_;
  return Cell{area, rest % num_years_, static_cast<Disease>(rest / num_years_)};
}

std::optional<std::int64_t> ObservationPanel::count(int area, int year, Disease d) const {
  const int idx = index(area, year, d);
  if (!observed_[idx]) return std::nullopt;
  return counts_[idx];
}

void ObservationPanel::set_count(int area, int year, Disease d, std::int64_t value) {
  if (value < 0) throw std::invalid_argument("ObservationPanel: negative count");
  const int idx = index(area, year, d);
  counts_[idx] = value;
  observed_[idx] = 1;
}

void ObservationPanel::set_missing(int area, int year, Disease d) {
  const int idx = index(area, year, d);
  counts_[idx] = 0;
  observed_[idx] = 0;
}

void ObservationPanel::set_population(int area, int year, Disease d, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("ObservationPanel: population must be positive");
  populations_[index(area, year, d)] = value;
}

int ObservationPanel::num_observed() const {
  int n = 0;
  for (auto o : observed_) n += o;
  return n;
}

int ObservationPanel::num_observed(Disease d) const {
  int n = 0;
  for (int t = 0; t < num_years_; ++t) {
    for (int i = 0; i < num_areas_; ++i) n += observed(i, t, d) ? 1 : 0;
  }
  return n;
}

void ObservationPanel::validate() const {
  for (std::size_t k = 0; k < populations_.size(); ++k) {
    if (!(populations_[k] > 0.0)) {
      throw std::invalid_argument("ObservationPanel: non-positive population in cell " +
                                  std::to_string(k));
    }
  }
}

ObservationPanel ObservationPanel::truncated(int num_years) const {
  if (num_years < 1 || num_years > num_years_) {
    throw std::invalid_argument("ObservationPanel::truncated: bad year count");
  }
  ObservationPanel out(num_areas_, num_years, first_year_);
  for (int d = 0; d < kNumDiseases; ++d) {
    const auto dis = static_cast<Disease>(d);
    for (int t = 0; t < num_years; ++t) {
      for (int i = 0; i < num_areas_; ++i) {
        out.set_population(i, t, dis, population(i, t, dis));
        if (observed(i, t, dis)) out.set_count(i, t, dis, counts_[index(i, t, dis)]);
      }
    }
  }
  return out;
}

ObservationPanel extend_panel(const ObservationPanel& panel, int horizon,
                              const PopulationProjection& projection) {
  if (horizon < 0) throw std::invalid_argument("extend_panel: negative horizon");
  const int A = panel.num_areas();
  const int T = panel.num_years();
  ObservationPanel out(A, T + horizon, panel.first_year());
  for (int d = 0; d < kNumDiseases; ++d) {
    const auto dis = static_cast<Disease>(d);
    for (int t = 0; t < T + horizon; ++t) {
      for (int i = 0; i < A; ++i) {
        if (t < T) {
          out.set_population(i, t, dis, panel.population(i, t, dis));
          if (auto c = panel.count(i, t, dis)) out.set_count(i, t, dis, *c);
          continue;
        }
        const int year = panel.first_year() + t;
        const auto pop = projection ? projection(i, year, dis) : std::nullopt;
        if (!pop) {
          throw std::invalid_argument("extend_panel: missing projected population for area " +
                                      std::to_string(i) + ", year " + std::to_string(year));
        }
        out.set_population(i, t, dis, *pop);
      }
    }
  }
  return out;
}

}  // namespace scm
