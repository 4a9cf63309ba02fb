#include "scm/simulate.hpp"
#include "scm/validation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace scm {
namespace {

TEST(Mask, CountsForHundredAreas) {
  const MaskSchedule m = build_mask(100, 2001, 19, kDefaultMaskFractions, 7);
  EXPECT_EQ(m.masked_per_band, (std::vector<int>{30, 25, 19, 12, 7, 0}));
  EXPECT_EQ(m.band_label(0), "2001-2003");
  EXPECT_EQ(m.band_label(5), "2016-2019");
  EXPECT_EQ(m.band_of(2019), 5);
  int masked_2001 = 0;
  int masked_2013 = 0;
  for (int i = 0; i < 100; ++i) {
    masked_2001 += !m.available(i, 2001);
    masked_2013 += !m.available(i, 2013);
  }
  EXPECT_EQ(masked_2001, 30);
  EXPECT_EQ(masked_2013, 7);
}

TEST(Mask, RevealsAreNested) {
  const MaskSchedule m = build_mask(40, 2001, 19, kDefaultMaskFractions, 3);
  for (int y = 2001; y < 2019; ++y) {
    for (int i = 0; i < 40; ++i) {
      if (m.available(i, y)) {
        EXPECT_TRUE(m.available(i, y + 1));
      }
    }
  }
  for (int i = 0; i < 40; ++i) {
    EXPECT_EQ(m.missing_duration(i), m.first_available_year[i] - 2001);
    EXPECT_EQ((m.missing_duration(i)) % 3, 0);
  }
}

TEST(Mask, TiesRoundTowardFewerAvailableAreas) {
  // 0.75 * 2 = 1.5 available -> 1 available, 1 masked.
  const MaskSchedule m = build_mask(2, 0, 6, {0.75, 1.0}, 1);
  EXPECT_EQ(m.masked_per_band, (std::vector<int>{1, 0}));
}

TEST(Mask, RejectsBadFractions) {
  EXPECT_THROW(build_mask(10, 0, 6, {0.8, 0.7, 1.0}, 1), std::invalid_argument);
  EXPECT_THROW(build_mask(10, 0, 6, {0.8, 0.9}, 1), std::invalid_argument);
  EXPECT_THROW(build_mask(10, 0, 6, {-0.1, 1.0}, 1), std::invalid_argument);
  EXPECT_THROW(build_mask(10, 0, 6, {}, 1), std::invalid_argument);
}

TEST(Mask, SeedDeterminism) {
  const auto a = build_mask(50, 2001, 19, kDefaultMaskFractions, 11);
  const auto b = build_mask(50, 2001, 19, kDefaultMaskFractions, 11);
  const auto c = build_mask(50, 2001, 19, kDefaultMaskFractions, 12);
  EXPECT_EQ(a.first_available_year, b.first_available_year);
  EXPECT_NE(a.first_available_year, c.first_available_year);
}

TEST(Mask, ApplySetsIncidenceMissingOnly) {
  ObservationPanel p(4, 6, 2001);
  for (int k = 0; k < p.num_cells(); ++k) {
    const Cell c = p.cell(k);
    p.set_population(c.area, c.year, c.disease, 1e4);
    p.set_count(c.area, c.year, c.disease, 3);
  }
  const MaskSchedule m = build_mask(4, 2001, 6, {0.5, 1.0}, 2);
  const ObservationPanel q = m.apply(p);
  EXPECT_EQ(q.num_observed(Disease::Mortality), 24);
  EXPECT_EQ(q.num_observed(Disease::Incidence), 24 - 2 * 3);
}

TEST(CvPlan, NineteenYearsHorizonThree) {
  const CvPlan plan = build_cv_plan(2001, 2019, 3);
  ASSERT_EQ(plan.num_folds(), 6);
  EXPECT_EQ(plan.folds[0].fit_first, 2001);
  EXPECT_EQ(plan.folds[0].fit_last, 2011);
  EXPECT_EQ(plan.folds[0].forecast_first, 2012);
  EXPECT_EQ(plan.folds[0].forecast_last, 2014);
  EXPECT_EQ(plan.folds[5].fit_last, 2016);
  EXPECT_EQ(plan.folds[5].forecast_last, 2019);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(plan.folds[k].index, k + 1);
}

TEST(CvPlan, ShortSpanAndErrors) {
  const CvPlan plan = build_cv_plan(2001, 2010, 3);
  ASSERT_EQ(plan.num_folds(), 1);
  EXPECT_EQ(plan.folds[0].fit_last, 2007);
  EXPECT_EQ(plan.folds[0].forecast_last, 2010);
  EXPECT_NO_THROW(build_cv_plan(2001, 2005, 3));
  EXPECT_THROW(build_cv_plan(2001, 2004, 3), std::invalid_argument);
  EXPECT_THROW(build_cv_plan(2001, 2019, 0), std::invalid_argument);
}

struct SmallPanel {
  ModelConfig cfg;
  AreaGraph graph = grid_graph(2, 3);
  ObservationPanel panel;
};

SmallPanel small_panel(int years) {
  SmallPanel s;
  const LatentLayout layout(s.cfg, s.graph, years);
  HyperParams h = default_hyper(layout);
  for (const auto& id : layout.hypers())
    if (id.kind == HyperKind::Precision) set_hyper_value(h, id, 30.0);
  SimulationOptions o;
  o.first_year = 2001;
  s.panel = simulate(s.cfg, s.graph, years, 5e4, h, 3, o).first;
  return s;
}

FitSettings fast() {
  FitSettings f;
  f.burn_in = 100;
  f.n_samples = 100;
  f.thin = 1;
  return f;
}

TEST(RunValidation, StructureAndLikelihoodAudit) {
  const auto s = small_panel(9);
  const MaskSchedule mask = build_mask(6, 2001, 9, {0.5, 0.67, 1.0}, 5, 2);
  const CvPlan plan = build_cv_plan(2001, 2009, 2, 6, 5);
  ASSERT_EQ(plan.num_folds(), 3);
  const ValidationReport r = run_validation(s.cfg, s.graph, s.panel, mask, plan, fast(), {{}, 2});
  ASSERT_EQ(r.folds.size(), 3u);
  std::set<std::pair<int, int>> forecast_cells;
  for (const auto& f : r.folds) {
    EXPECT_FALSE(f.failed) << f.error;
    EXPECT_EQ(f.likelihood_terms, f.observed_cells);
    // Fit years only, incidence thinned by the mask.
    const int fit_years = f.fold.fit_last - 2001 + 1;
    int expected = 6 * fit_years;
    for (int t = 0; t < fit_years; ++t)
      for (int i = 0; i < 6; ++i) expected += mask.available(i, 2001 + t);
    EXPECT_EQ(f.observed_cells, expected);
  }
  EXPECT_EQ(r.forecast.grouping("horizon").size(), 2u);
  EXPECT_EQ(r.forecast.grouping("horizon_cumulative").size(), 2u);
  const auto h1 = r.forecast.grouping("horizon_cumulative")[0];
  const auto h2 = r.forecast.grouping("horizon_cumulative")[1];
  EXPECT_EQ(h1.cells, 3 * 6);
  EXPECT_EQ(h2.cells, 3 * 12);
  EXPECT_EQ(r.forecast.grouping("all").at(0).cells, 36);
  for (const auto& c : r.in_window.cells) {
    EXPECT_FALSE(mask.available(c.cell.area, c.calendar_year));
    EXPECT_EQ(c.cell.disease, Disease::Incidence);
  }
  EXPECT_FALSE(r.in_window.grouping("band").empty());
  EXPECT_FALSE(r.in_window.grouping("duration").empty());
}

TEST(RunValidation, FullAvailabilityLeavesInWindowEmpty) {
  const auto s = small_panel(7);
  const MaskSchedule mask = build_mask(6, 2001, 7, {1.0}, 5);
  const CvPlan plan = build_cv_plan(2001, 2007, 1, 1, 5);
  const ValidationReport r = run_validation(s.cfg, s.graph, s.panel, mask, plan, fast());
  EXPECT_TRUE(r.in_window.cells.empty());
  EXPECT_TRUE(r.in_window.aggregates.empty());
  EXPECT_FALSE(r.in_window.warnings.empty());
  EXPECT_EQ(r.forecast.cells.size(), 6u);
}

TEST(RunValidation, FoldsDoNotSeeForecastYears) {
  // Corrupting counts after a fold's window must not change its fit.
  auto s = small_panel(8);
  const MaskSchedule mask = build_mask(6, 2001, 8, {1.0}, 5);
  const CvPlan plan = build_cv_plan(2001, 8 + 2000, 1, 1, 5);
  const auto a = run_validation(s.cfg, s.graph, s.panel, mask, plan, fast());
  ObservationPanel corrupt = s.panel;
  for (int i = 0; i < 6; ++i) corrupt.set_count(i, 7, Disease::Mortality, 999);
  const auto b = run_validation(s.cfg, s.graph, corrupt, mask, plan, fast());
  ASSERT_EQ(a.forecast.cells.size(), b.forecast.cells.size());
  for (std::size_t k = 0; k < a.forecast.cells.size(); ++k) {
    EXPECT_EQ(a.forecast.cells[k].fitted_mean, b.forecast.cells[k].fitted_mean);
    EXPECT_EQ(a.forecast.cells[k].dss, b.forecast.cells[k].dss);
  }
}

TEST(RunValidation, RejectsPartialMortality) {
  auto s = small_panel(7);
  s.panel.set_missing(0, 0, Disease::Mortality);
  const MaskSchedule mask = build_mask(6, 2001, 7, {1.0}, 5);
  EXPECT_THROW(run_validation(s.cfg, s.graph, s.panel, mask, build_cv_plan(2001, 2007, 1, 1, 5), fast()),
               std::invalid_argument);
}

TEST(RunValidation, FailedFoldIsRecorded) {
  const auto s = small_panel(7);
  const MaskSchedule mask = build_mask(6, 2001, 7, {1.0}, 5);
  FitSettings f = fast();
  f.fixed_hypers = {{"no_such", 1.0}};
  const auto r = run_validation(s.cfg, s.graph, s.panel, mask, build_cv_plan(2001, 2007, 1, 2, 5), f);
  ASSERT_EQ(r.folds.size(), 2u);
  EXPECT_TRUE(r.folds[0].failed);
  EXPECT_FALSE(r.folds[0].error.empty());
}

}  // namespace
}  // namespace scm
