#pragma once

#include "scm/graph.hpp"
#include "scm/model.hpp"
#include "scm/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>

namespace scm {

/// 4-neighbour lattice; area index is row * cols + col.
AreaGraph grid_graph(int rows, int cols);

using PopulationFunction = std::function<double(int area, int year, Disease d)>;

struct SimulationOptions {
  double alpha_incidence = -6.8;
  double alpha_mortality = -7.0;
  int first_year = 0;
};

struct SimulationTruth {
  std::shared_ptr<const LatentLayout> layout;
  HyperParams hyper;
  Eigen::VectorXd field;
  Eigen::VectorXd rates;  // per person-year, panel cell order
  std::vector<std::int64_t> counts;

  double rate(int area, int year, Disease d) const;
};

/// Latent effects drawn from their constrained intrinsic priors, counts drawn
/// as Poisson(n r). Deterministic given the seed.
std::pair<ObservationPanel, SimulationTruth> simulate(const ModelConfig& config, const AreaGraph& graph,
                                                      int num_years, const PopulationFunction& populations,
                                                      const HyperParams& hyper, std::uint64_t seed,
                                                      const SimulationOptions& options = {});

std::pair<ObservationPanel, SimulationTruth> simulate(const ModelConfig& config, const AreaGraph& graph,
                                                      int num_years, double population, const HyperParams& hyper,
                                                      std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace scm
