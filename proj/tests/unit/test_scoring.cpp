#include "scm/scoring.hpp"
#include "scm/csv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace scm {
namespace {

TEST(Scoring, GoldenValues) {
  EXPECT_NEAR(dss(10.0, 10.0, 2.0), 2.0 * std::log(2.0), 1e-9);
  EXPECT_EQ(interval_score(1.0, 3.0, 4.0, 0.05), 42.0);
  EXPECT_EQ(arb(100.0, 110.0), 0.10);
  EXPECT_EQ(interval_score(1.0, 3.0, 2.0, 0.05), 2.0);
  EXPECT_EQ(interval_score(1.0, 3.0, 0.5, 0.1), 12.0);
}

TEST(Scoring, DssFromDraws) {
  const std::vector<double> draws = {8.0, 10.0, 12.0};  // mean 10, sd 2
  EXPECT_NEAR(dss(10.0, draws), 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(dss(14.0, draws), 4.0 + 2.0 * std::log(2.0), 1e-12);
}

TEST(Scoring, Errors) {
  EXPECT_THROW(arb(0.0, 1.0), ScoringError);
  EXPECT_THROW(dss(1.0, 1.0, 0.0), ScoringError);
  const std::vector<double> one = {3.0};
  EXPECT_THROW(dss(1.0, one), ScoringError);
  const std::vector<double> flat = {3.0, 3.0, 3.0};
  EXPECT_THROW(dss(1.0, flat), ScoringError);
  EXPECT_THROW(interval_score(3.0, 1.0, 2.0, 0.05), std::invalid_argument);
  EXPECT_THROW(interval_score(1.0, 3.0, 2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(interval_score(1.0, 3.0, 2.0, 1.0), std::invalid_argument);
  ScoringOptions o;
  o.rate_unit = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(Scoring, ArbIsScaleInvariant) {
  for (double s : {1e-5, 1.0, 1e5}) EXPECT_NEAR(arb(3.0 * s, 4.5 * s), 0.5, 1e-14);
}

// Expected score under the true law is minimised by reporting the truth.
TEST(Scoring, IntervalScoreIsProperForCentralQuantiles) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y(200000);
  for (auto& v : y) v = normal(rng);
  const double beta = 0.1;
  const double z = 1.6448536269514722;
  auto expected = [&](double l, double u) {
    double s = 0.0;
    for (double v : y) s += interval_score(l, u, v, beta);
    return s / static_cast<double>(y.size());
  };
  const double best = expected(-z, z);
  EXPECT_LT(best, expected(-0.8 * z, 0.8 * z));
  EXPECT_LT(best, expected(-1.2 * z, 1.2 * z));
  EXPECT_LT(best, expected(-z + 0.3, z + 0.3));
}

TEST(Scoring, DssIsProperInMeanAndSpread) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(3.0, 2.0);
  std::vector<double> y(200000);
  for (auto& v : y) v = normal(rng);
  auto expected = [&](double m, double s) {
    double acc = 0.0;
    for (double v : y) acc += dss(v, m, s);
    return acc / static_cast<double>(y.size());
  };
  const double best = expected(3.0, 2.0);
  EXPECT_LT(best, expected(3.5, 2.0));
  EXPECT_LT(best, expected(3.0, 1.5));
  EXPECT_LT(best, expected(3.0, 2.6));
}

CellScore make_cell(int area, int year, double a, double d, double is, std::string band) {
  CellScore c;
  c.cell = {area, year, Disease::Incidence};
  c.calendar_year = 2000 + year;
  c.arb = a;
  c.dss = d;
  c.interval = is;
  c.groups.emplace("band", std::move(band));
  return c;
}

TEST(Aggregate, MeansPerGroupAndSelection) {
  std::vector<CellScore> cells = {
      make_cell(0, 0, 0.1, 1.0, 10.0, "a"), make_cell(1, 0, 0.3, 3.0, 30.0, "a"),
      make_cell(0, 1, 0.5, 5.0, 50.0, "b"), make_cell(1, 1, 0.7, 7.0, 70.0, "b")};
  cells[3].arb.reset();
  const auto all = aggregate(cells, {}, {}, "");
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].key, "all");
  EXPECT_EQ(all[0].cells, 4);
  EXPECT_EQ(all[0].arb_cells, 3);
  EXPECT_NEAR(all[0].marb, 0.3, 1e-15);
  EXPECT_NEAR(all[0].dss, 4.0, 1e-15);
  EXPECT_NEAR(all[0].interval, 40.0, 1e-15);

  const auto band = aggregate(cells, {}, {}, "band");
  ASSERT_EQ(band.size(), 2u);
  EXPECT_NEAR(band[0].marb, 0.2, 1e-15);
  EXPECT_NEAR(band[1].marb, 0.5, 1e-15);
  // Equal-sized groups recompose the overall mean.
  EXPECT_NEAR(0.5 * (band[0].dss + band[1].dss), all[0].dss, 1e-12);

  const auto sel = aggregate(cells, {1}, {2001}, "");
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0].cells, 1);
  EXPECT_TRUE(std::isnan(sel[0].marb));
  EXPECT_NEAR(sel[0].dss, 7.0, 1e-15);
}

TEST(Aggregate, EmptySelectionWarns) {
  const std::vector<CellScore> cells = {make_cell(0, 0, 0.1, 1.0, 10.0, "a")};
  std::vector<std::string> warnings;
  EXPECT_TRUE(aggregate(cells, {5}, {}, "band", &warnings).empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ScoreCell, RatesUseUnitAndFlagsZeroRate) {
  CellScoreInputs in;
  in.cell = {0, 0, Disease::Incidence};
  in.observed_rate = 100e-5;
  in.observed_count = 100;
  in.rate_draws = std::vector<double>(101, 110e-5);
  in.count_draws = {90.0, 100.0, 110.0};
  const CellScore s = score_cell(in, {});
  EXPECT_NEAR(s.observed_rate, 100.0, 1e-9);
  EXPECT_NEAR(s.fitted_mean, 110.0, 1e-9);
  ASSERT_TRUE(s.arb);
  EXPECT_NEAR(*s.arb, 0.1, 1e-12);
  ASSERT_TRUE(s.interval);
  EXPECT_NEAR(*s.interval, 40.0 * 10.0, 1e-6);
  EXPECT_TRUE(s.flag.empty());

  in.observed_rate = 0.0;
  in.count_draws = {5.0, 5.0};
  const CellScore z = score_cell(in, {});
  EXPECT_FALSE(z.arb);
  EXPECT_FALSE(z.dss);
  EXPECT_NE(z.flag.find("zero_rate"), std::string::npos);
  EXPECT_NE(z.flag.find("degenerate_predictive"), std::string::npos);
}

TEST(ScoreReport, WritersEmitUnitHeader) {
  ScoreReport r;
  r.cells = {make_cell(0, 0, 0.1, 1.0, 10.0, "a")};
  r.aggregates = aggregate(r.cells, {}, {}, "band");
  std::ostringstream a;
  std::ostringstream b;
  write_cell_scores(a, r);
  write_aggregates(b, r);
  const std::string header = "# rate_unit=" + format_number(1e5) + " beta=0.05\n";
  EXPECT_EQ(a.str().rfind(header, 0), 0u);
  EXPECT_EQ(b.str().rfind(header, 0), 0u);
  EXPECT_NE(a.str().find("band=a"), std::string::npos);
}

}  // namespace
}  // namespace scm
