#include "scm/national.hpp"
#include "scm/simulate.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace scm {
namespace {

TEST(NationalDraws, ColumnSums) {
  CountDraws c;
  c.cells = {{0, 0, Disease::Incidence}, {1, 0, Disease::Incidence}, {0, 0, Disease::Mortality}};
  c.counts.resize(1, 3);
  c.counts << 3, 4, 100;
  const CountMatrix n = national_draws(c, {0, 1}, {0});
  ASSERT_EQ(n.rows(), 1);
  EXPECT_EQ(n(0, 0), 7);
  EXPECT_EQ(national_draws(c, {0}, {0}, Disease::Mortality)(0, 0), 100);
}

TEST(NationalDraws, MatchesNaiveLoopExactly) {
  const int areas = 7;
  const int years = 4;
  const int draws = 500;
  CountDraws c;
  for (int t = 0; t < years; ++t)
    for (int i = 0; i < areas; ++i) c.cells.push_back({i, t, Disease::Incidence});
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> u(0, 1'000'000'000);
  c.counts.resize(draws, areas * years);
  for (Eigen::Index s = 0; s < c.counts.rows(); ++s)
    for (Eigen::Index k = 0; k < c.counts.cols(); ++k) c.counts(s, k) = u(rng);
  std::vector<int> all_areas(areas);
  std::vector<int> all_years(years);
  for (int i = 0; i < areas; ++i) all_areas[i] = i;
  for (int t = 0; t < years; ++t) all_years[t] = t;
  const CountMatrix n = national_draws(c, all_areas, all_years);
  for (int s = 0; s < draws; ++s)
    for (int t = 0; t < years; ++t) {
      std::int64_t total = 0;
      for (int i = 0; i < areas; ++i) total += c.counts(s, t * areas + i);
      ASSERT_EQ(n(s, t), total);
    }
}

TEST(NationalDraws, MonotoneInAreaSet) {
  CountDraws c;
  c.cells = {{0, 0, Disease::Incidence}, {1, 0, Disease::Incidence}, {2, 0, Disease::Incidence}};
  c.counts.resize(2, 3);
  c.counts << 1, 2, 3, 0, 5, 9;
  const CountMatrix small = national_draws(c, {0, 1}, {0});
  const CountMatrix big = national_draws(c, {0, 1, 2}, {0});
  EXPECT_TRUE((big.array() >= small.array()).all());
}

TEST(NationalDraws, MissingAreaRejected) {
  CountDraws c;
  c.cells = {{0, 0, Disease::Incidence}};
  c.counts = CountMatrix::Ones(2, 1);
  EXPECT_THROW(national_draws(c, {0, 1}, {0}), std::invalid_argument);
  EXPECT_THROW(national_draws(c, {0}, {1}), std::invalid_argument);
}

TEST(Summarize, ObservedTotalsAndQuantiles) {
  ObservationPanel p(2, 2, 2001);
  for (int k = 0; k < p.num_cells(); ++k) {
    const Cell c = p.cell(k);
    p.set_population(c.area, c.year, c.disease, 1e4);
    p.set_count(c.area, c.year, c.disease, 10 + c.area);
  }
  p.set_missing(1, 1, Disease::Incidence);
  CountMatrix d(5, 2);
  d << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50;
  const NationalSummary s = summarize_national(d, p, {0, 1}, {0, 1});
  ASSERT_EQ(s.years.size(), 2u);
  EXPECT_EQ(s.years[0].year, 2001);
  EXPECT_EQ(s.years[0].observed, 21);
  EXPECT_FALSE(s.years[1].observed);
  EXPECT_DOUBLE_EQ(s.years[0].mean, 3.0);
  EXPECT_DOUBLE_EQ(s.years[0].q025, 1.1);
  EXPECT_DOUBLE_EQ(s.years[1].q975, 49.0);
  EXPECT_DOUBLE_EQ(s.years[1].cil, s.years[1].q975 - s.years[1].q025);
  std::ostringstream out;
  write_national(out, s);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "year,observed,mean,q025,q975,cil");
}

TEST(NationalDistribution, MeanIsSumOfAreaMeans) {
  ModelConfig cfg;
  const AreaGraph g = grid_graph(2, 2);
  FitSettings f;
  f.burn_in = 200;
  f.n_samples = 300;
  f.thin = 1;
  const LatentLayout layout(cfg, g, 3);
  HyperParams h = default_hyper(layout);
  for (const auto& id : layout.hypers())
    if (id.kind == HyperKind::Precision) set_hyper_value(h, id, 30.0);
  const auto panel = simulate(cfg, g, 3, 5e4, h, 4).first;
  const PosteriorSamples s = run_mcmc(cfg, g, panel, f);
  const NationalSummary nat = national_distribution(s, panel, 77);
  std::vector<Cell> cells;
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 4; ++i) cells.push_back({i, t, Disease::Incidence});
  const CountDraws per_area = predictive_counts(s, panel, cells, 77);
  ASSERT_EQ(nat.years.size(), 3u);
  for (int t = 0; t < 3; ++t) {
    double sum_means = 0.0;
    for (int i = 0; i < 4; ++i) sum_means += per_area.counts.col(t * 4 + i).cast<double>().mean();
    EXPECT_NEAR(nat.years[t].mean, sum_means, 1e-9 * sum_means);
  }
}

}  // namespace
}  // namespace scm
