#include "scm/simulate.hpp"

#include "scm/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace scm {

AreaGraph grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid_graph: rows and cols must be >= 1");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int k = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(k, k + 1);
      if (r + 1 < rows) edges.emplace_back(k, k + cols);
    }
  }
  return AreaGraph(rows * cols, edges);
}

double SimulationTruth::rate(int area, int year, Disease d) const {
  const int a = layout->num_areas();
  return rates((static_cast<int>(d) * layout->num_years() + year) * a + area);
}

std::pair<ObservationPanel, SimulationTruth> simulate(const ModelConfig& config, const AreaGraph& graph,
                                                      int num_years, const PopulationFunction& populations,
                                                      const HyperParams& hyper, std::uint64_t seed,
                                                      const SimulationOptions& options) {
  auto layout = std::make_shared<const LatentLayout>(config, graph, num_years);
  for (const auto& id : layout->hypers()) {
    if (!(hyper_value(hyper, id) > 0.0)) throw std::invalid_argument("simulate: " + id.name() + " must be positive");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd field = Eigen::VectorXd::Zero(layout->size());
  for (const auto& b : layout->blocks()) {
    if (b.label == BlockLabel::AlphaI) {
      field(b.offset) = options.alpha_incidence;
      continue;
    }
    if (b.label == BlockLabel::AlphaM) {
      field(b.offset) = options.alpha_mortality;
      continue;
    }
    const double tau = hyper.precision(*b.precision);
    SparseMatrix q = tau * b.structure->entries;
    SparseMatrix c;
    if (b.constraints) {
      c = b.constraints->matrix.sparseView();
      if (b.structure->null_dim > 0) q += SparseMatrix(c.transpose() * c);
    }
    const ConstrainedGaussian g(Eigen::VectorXd::Zero(b.length), q, c);
    field.segment(b.offset, b.length) = g.sample(rng);
  }

  const Eigen::VectorXd eta = linear_predictors(*layout, field, hyper);
  ObservationPanel panel(graph.num_areas(), num_years, options.first_year);
  SimulationTruth truth{layout, hyper, field, eta.array().exp(), {}};
  truth.counts.resize(static_cast<std::size_t>(panel.num_cells()));
  for (int d = 0; d < kNumDiseases; ++d) {
    for (int t = 0; t < num_years; ++t) {
      for (int i = 0; i < graph.num_areas(); ++i) {
        const auto dis = static_cast<Disease>(d);
        const double n = populations(i, t, dis);
        if (!(n > 0.0)) throw std::invalid_argument("simulate: populations must be positive");
        panel.set_population(i, t, dis, n);
        const int idx = panel.index(i, t, dis);
        std::poisson_distribution<std::int64_t> poisson(n * truth.rates(idx));
        const std::int64_t count = poisson(rng);
        truth.counts[static_cast<std::size_t>(idx)] = count;
        panel.set_count(i, t, dis, count);
      }
    }
  }
  return {std::move(panel), std::move(truth)};
}

std::pair<ObservationPanel, SimulationTruth> simulate(const ModelConfig& config, const AreaGraph& graph,
                                                      int num_years, double population, const HyperParams& hyper,
                                                      std::uint64_t seed, const SimulationOptions& options) {
  return simulate(config, graph, num_years, [population](int, int, Disease) { return population; }, hyper, seed,
                  options);
}

}  // namespace scm
