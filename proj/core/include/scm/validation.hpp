#pragma once

#include "scm/graph.hpp"
#include "scm/inference.hpp"
#include "scm/model.hpp"
#include "scm/panel.hpp"
#include "scm/scoring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scm {

inline const std::vector<double> kDefaultMaskFractions = {0.70, 0.75, 0.81, 0.88, 0.93, 1.00};

/// Incidence availability per area: an area is available from its first
/// available year onwards. Bands are consecutive `band_length`-year periods;
/// the last band extends to the final year.
struct MaskSchedule {
  int num_areas = 0;
  int first_year = 0;
  int num_years = 0;
  int band_length = 3;
  std::vector<double> fractions;
  std::uint64_t seed = 0;
  std::vector<int> masked_per_band;
  std::vector<int> first_available_year;  // calendar year per area

  int num_bands() const { return static_cast<int>(fractions.size()); }
  int band_of(int calendar_year) const;
  int band_start(int band) const { return first_year + band * band_length; }
  int band_end(int band) const;
  std::string band_label(int band) const;
  bool available(int area, int calendar_year) const { return calendar_year >= first_available_year[area]; }
  /// Years of incidence withheld from the area (0 when never masked).
  int missing_duration(int area) const { return first_available_year[area] - first_year; }

  /// Copy of the panel with unavailable incidence cells set missing.
  ObservationPanel apply(const ObservationPanel& panel) const;
};

/// Band b masks round-down-on-ties(A (1 - fractions[b])) areas. One seeded
/// permutation is drawn; band b masks its first masked_per_band[b] entries,
/// so reveals are nested.
MaskSchedule build_mask(int num_areas, int first_year, int num_years, const std::vector<double>& fractions,
                        std::uint64_t seed, int band_length = 3);

struct CvFold {
  int index = 0;  // 1-based
  int fit_first = 0;
  int fit_last = 0;
  int forecast_first = 0;
  int forecast_last = 0;
};

struct CvPlan {
  int first_year = 0;
  int last_year = 0;
  int horizon = 0;
  std::vector<CvFold> folds;

  int num_folds() const { return static_cast<int>(folds.size()); }
};

/// K = clamp(span - horizon - min_fit_years + 1, 1, max_folds) rolling-origin
/// folds, the last forecasting through last_year. Every fold fits from
/// first_year. Rejects spans shorter than horizon + 2.
CvPlan build_cv_plan(int first_year, int last_year, int horizon, int max_folds = 6, int min_fit_years = 11);

struct FoldResult {
  CvFold fold;
  bool failed = false;
  std::string error;
  int likelihood_terms = 0;
  int observed_cells = 0;
  ChainDiagnostics diagnostics;
};

struct ValidationOptions {
  ScoringOptions scoring;
  /// Folds run concurrently on up to this many threads.
  int threads = 1;
};

struct ValidationReport {
  MaskSchedule mask;
  CvPlan plan;
  std::vector<FoldResult> folds;
  /// Masked incidence cells inside each fold's fit window; groupings "band",
  /// "duration", "year" and "all".
  ScoreReport in_window;
  /// Incidence cells in forecast years; groupings "horizon" (exact year
  /// ahead), "horizon_cumulative" (all years up to h) and "all".
  ScoreReport forecast;
};

/// For each fold: mask incidence, drop counts after the fit window, fit with
/// seed rng_seed + fold index and score masked and forecast cells against the
/// original panel. A failed fold is recorded and the rest continue.
ValidationReport run_validation(const ModelConfig& config, const AreaGraph& graph, const ObservationPanel& panel,
                                const MaskSchedule& mask, const CvPlan& plan, const FitSettings& settings,
                                const ValidationOptions& options = {});

}  // namespace scm
