#include "scm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>

namespace scm {

namespace {

// Nearest integer, ties to the lower value.
int round_half_down(double x) {
  const double lo = std::floor(x);
  return static_cast<int>(x - lo > 0.5 + 1e-9 ? lo + 1.0 : lo);
}

struct FoldOutput {
  FoldResult result;
  std::vector<CellScore> in_window;
  std::vector<CellScore> forecast;
};

std::vector<CellScore> score_cells(const PosteriorSamples& samples, const ObservationPanel& fold_panel,
                                   const ObservationPanel& truth, const std::vector<Cell>& cells,
                                   std::uint64_t seed, const ScoringOptions& options) {
  std::vector<CellScore> out;
  if (cells.empty()) return out;
  const Eigen::MatrixXd log_rates = samples.log_rate_draws(cells);
  const CountDraws counts = predictive_counts(samples, fold_panel, cells, seed);
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const auto cc = static_cast<Eigen::Index>(c);
    CellScoreInputs in;
    in.cell = cell;
    in.calendar_year = truth.first_year() + cell.year;
    in.observed_count = *truth.count(cell.area, cell.year, cell.disease);
    in.observed_rate =
        static_cast<double>(in.observed_count) / truth.population(cell.area, cell.year, cell.disease);
    in.rate_draws.resize(static_cast<std::size_t>(log_rates.rows()));
    in.count_draws.resize(static_cast<std::size_t>(log_rates.rows()));
    for (Eigen::Index s = 0; s < log_rates.rows(); ++s) {
      in.rate_draws[static_cast<std::size_t>(s)] = std::exp(log_rates(s, cc));
      in.count_draws[static_cast<std::size_t>(s)] = static_cast<double>(counts.counts(s, cc));
    }
    out.push_back(score_cell(in, options));
  }
  return out;
}

FoldOutput run_fold(const ModelConfig& config, const AreaGraph& graph, const ObservationPanel& panel,
                    const MaskSchedule& mask, const CvPlan& plan, const CvFold& fold, const FitSettings& settings,
                    const ValidationOptions& options) {
  FoldOutput out;
  out.result.fold = fold;
  const int fit_years = fold.fit_last - plan.first_year + 1;
  const int horizon = fold.forecast_last - fold.fit_last;
  ObservationPanel fold_panel = mask.apply(panel.truncated(fit_years + horizon));
  for (int t = fit_years; t < fit_years + horizon; ++t) {
    for (int i = 0; i < panel.num_areas(); ++i) {
      fold_panel.set_missing(i, t, Disease::Incidence);
      fold_panel.set_missing(i, t, Disease::Mortality);
    }
  }
  out.result.observed_cells = fold_panel.num_observed();

  FitSettings fold_settings = settings;
  fold_settings.rng_seed = settings.rng_seed + static_cast<std::uint64_t>(fold.index);
  try {
    const PosteriorSamples samples = fit_model(config, graph, fold_panel, fold_settings);
    out.result.likelihood_terms = samples.diagnostics.likelihood_terms;
    out.result.diagnostics = samples.diagnostics;

    std::vector<Cell> masked;
    std::vector<Cell> ahead;
    for (int t = 0; t < fit_years + horizon; ++t) {
      const int year = plan.first_year + t;
      for (int i = 0; i < panel.num_areas(); ++i) {
        if (!panel.observed(i, t, Disease::Incidence)) continue;
        if (t >= fit_years) {
          ahead.push_back({i, t, Disease::Incidence});
        } else if (!mask.available(i, year)) {
          masked.push_back({i, t, Disease::Incidence});
        }
      }
    }
    const std::uint64_t score_seed = fold_settings.rng_seed * 6364136223846793005ULL + 1442695040888963407ULL;
    out.in_window = score_cells(samples, fold_panel, panel, masked, score_seed, options.scoring);
    out.forecast = score_cells(samples, fold_panel, panel, ahead, score_seed + 1, options.scoring);

    const std::string fold_key = std::to_string(fold.index);
    for (auto& c : out.in_window) {
      c.groups.emplace("band", mask.band_label(mask.band_of(c.calendar_year)));
      c.groups.emplace("duration", std::to_string(mask.missing_duration(c.cell.area)));
      c.groups.emplace("year", std::to_string(c.calendar_year));
      c.groups.emplace("fold", fold_key);
    }
    for (auto& c : out.forecast) {
      const int h = c.calendar_year - fold.fit_last;
      c.groups.emplace("horizon", std::to_string(h));
      for (int k = h; k <= horizon; ++k) c.groups.emplace("horizon_cumulative", std::to_string(k));
      c.groups.emplace("fold", fold_key);
    }
  } catch (const std::exception& e) {
    out.result.failed = true;
    out.result.error = e.what();
    out.in_window.clear();
    out.forecast.clear();
  }
  return out;
}

void build_aggregates(ScoreReport& report, const std::vector<std::string>& groupings) {
  report.aggregates.clear();
  for (const auto& g : groupings) {
    auto part = aggregate(report.cells, {}, {}, g, &report.warnings);
    report.aggregates.insert(report.aggregates.end(), part.begin(), part.end());
  }
}

}  // namespace

int MaskSchedule::band_of(int calendar_year) const {
  if (calendar_year < first_year) throw std::out_of_range("band_of: year precedes the schedule");
  return std::min((calendar_year - first_year) / band_length, num_bands() - 1);
}

int MaskSchedule::band_end(int band) const {
  if (band == num_bands() - 1) return std::max(first_year + num_years - 1, band_start(band) + band_length - 1);
  return band_start(band) + band_length - 1;
}

std::string MaskSchedule::band_label(int band) const {
  return std::to_string(band_start(band)) + "-" + std::to_string(band_end(band));
}

ObservationPanel MaskSchedule::apply(const ObservationPanel& panel) const {
  if (panel.num_areas() != num_areas) throw std::invalid_argument("mask and panel disagree on the number of areas");
  if (panel.first_year() != first_year) throw std::invalid_argument("mask and panel start in different years");
  ObservationPanel out = panel;
  for (int t = 0; t < panel.num_years(); ++t) {
    for (int i = 0; i < num_areas; ++i) {
      if (!available(i, first_year + t)) out.set_missing(i, t, Disease::Incidence);
    }
  }
  return out;
}

MaskSchedule build_mask(int num_areas, int first_year, int num_years, const std::vector<double>& fractions,
                        std::uint64_t seed, int band_length) {
  if (num_areas < 1) throw std::invalid_argument("build_mask: num_areas must be positive");
  if (num_years < 1) throw std::invalid_argument("build_mask: num_years must be positive");
  if (band_length < 1) throw std::invalid_argument("build_mask: band_length must be positive");
  if (fractions.empty()) throw std::invalid_argument("build_mask: no fractions");
  for (std::size_t b = 0; b < fractions.size(); ++b) {
    if (!(fractions[b] >= 0.0 && fractions[b] <= 1.0)) {
      throw std::invalid_argument("build_mask: fractions must lie in [0, 1]");
    }
    if (b > 0 && fractions[b] < fractions[b - 1]) {
      throw std::invalid_argument("build_mask: fractions must be non-decreasing");
    }
  }
  if (fractions.back() != 1.0) throw std::invalid_argument("build_mask: the last fraction must be 1");

  MaskSchedule m;
  m.num_areas = num_areas;
  m.first_year = first_year;
  m.num_years = num_years;
  m.band_length = band_length;
  m.fractions = fractions;
  m.seed = seed;
  for (double f : fractions) m.masked_per_band.push_back(num_areas - round_half_down(f * num_areas));

  std::vector<int> order(static_cast<std::size_t>(num_areas));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  m.first_available_year.assign(static_cast<std::size_t>(num_areas), first_year);
  for (int b = 0; b < m.num_bands(); ++b) {
    for (int p = 0; p < m.masked_per_band[b]; ++p) m.first_available_year[order[p]] = m.band_end(b) + 1;
  }
  return m;
}

CvPlan build_cv_plan(int first_year, int last_year, int horizon, int max_folds, int min_fit_years) {
  if (horizon < 1) throw std::invalid_argument("build_cv_plan: horizon must be >= 1");
  if (max_folds < 1) throw std::invalid_argument("build_cv_plan: max_folds must be >= 1");
  const int span = last_year - first_year + 1;
  if (span < horizon + 2) {
    throw std::invalid_argument("build_cv_plan: span of " + std::to_string(span) +
                                " years leaves fewer than two fit years");
  }
  const int k = std::clamp(span - horizon - min_fit_years + 1, 1, max_folds);
  CvPlan plan{first_year, last_year, horizon, {}};
  for (int f = 1; f <= k; ++f) {
    const int end = last_year - horizon - (k - f);
    plan.folds.push_back({f, first_year, end, end + 1, end + horizon});
  }
  return plan;
}

ValidationReport run_validation(const ModelConfig& config, const AreaGraph& graph, const ObservationPanel& panel,
                                const MaskSchedule& mask, const CvPlan& plan, const FitSettings& settings,
                                const ValidationOptions& options) {
  options.scoring.validate();
  settings.validate();
  if (plan.folds.empty()) throw std::invalid_argument("run_validation: plan has no folds");
  if (plan.first_year != panel.first_year() || plan.last_year > panel.first_year() + panel.num_years() - 1) {
    throw std::invalid_argument("run_validation: panel does not cover the plan years");
  }
  for (int t = 0; t <= plan.last_year - plan.first_year; ++t) {
    for (int i = 0; i < panel.num_areas(); ++i) {
      if (!panel.observed(i, t, Disease::Mortality)) {
        throw std::invalid_argument("run_validation: mortality must be fully observed");
      }
    }
  }

  ValidationReport report;
  report.mask = mask;
  report.plan = plan;
  report.in_window.options = options.scoring;
  report.forecast.options = options.scoring;

  std::vector<FoldOutput> outputs(plan.folds.size());
  const std::size_t threads = static_cast<std::size_t>(std::max(1, options.threads));
  for (std::size_t start = 0; start < plan.folds.size(); start += threads) {
    const std::size_t stop = std::min(plan.folds.size(), start + threads);
    if (threads == 1) {
      outputs[start] = run_fold(config, graph, panel, mask, plan, plan.folds[start], settings, options);
      continue;
    }
    std::vector<std::future<FoldOutput>> running;
    for (std::size_t f = start; f < stop; ++f) {
      running.push_back(std::async(std::launch::async, [&, f] {
        return run_fold(config, graph, panel, mask, plan, plan.folds[f], settings, options);
      }));
    }
    for (std::size_t f = start; f < stop; ++f) outputs[f] = running[f - start].get();
  }

  for (auto& o : outputs) {
    if (o.result.failed) {
      report.in_window.warnings.push_back("fold " + std::to_string(o.result.fold.index) + " failed: " +
                                          o.result.error);
    }
    report.folds.push_back(std::move(o.result));
    for (auto& c : o.in_window) report.in_window.cells.push_back(std::move(c));
    for (auto& c : o.forecast) report.forecast.cells.push_back(std::move(c));
  }
  build_aggregates(report.in_window, {"", "band", "duration", "year"});
  build_aggregates(report.forecast, {"", "horizon", "horizon_cumulative"});
  return report;
}

}  // namespace scm
