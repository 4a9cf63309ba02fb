#include "scm/gaussian.hpp"
#include "scm/inference.hpp"
#include "scm/model.hpp"
#include "scm/national.hpp"
#include "scm/simulate.hpp"

#include <benchmark/benchmark.h>

namespace {

scm::HyperParams truth_hyper(const scm::LatentLayout& layout) {
  scm::HyperParams h = scm::default_hyper(layout);
  for (const auto& id : layout.hypers()) {
    if (id.kind == scm::HyperKind::Precision) scm::set_hyper_value(h, id, 20.0);
  }
  return h;
}

void BM_StructureFactor(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const scm::AreaGraph graph = scm::grid_graph(side, side);
  const auto r = scm::interaction_structure(scm::InteractionType::IV, scm::rw1_structure(10), scm::icar_structure(graph));
  const auto c = scm::constraints_for(scm::InteractionType::IV, graph, 10);
  const scm::SparseMatrix cs = c.matrix.sparseView();
  const scm::SparseMatrix q = scm::SparseMatrix(r.entries + scm::SparseMatrix(cs.transpose() * cs));
  for (auto _ : state) {
    scm::ConstrainedGaussian g(Eigen::VectorXd::Zero(q.rows()), q, cs);
    benchmark::DoNotOptimize(g.log_det_restricted());
  }
  state.SetLabel("dim " + std::to_string(q.rows()));
}
BENCHMARK(BM_StructureFactor)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GaussianApproximation(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const scm::AreaGraph graph = scm::grid_graph(side, side);
  const scm::ModelConfig cfg;
  const scm::LatentLayout layout(cfg, graph, 8);
  const auto hyper = truth_hyper(layout);
  const auto [panel, truth] = scm::simulate(cfg, graph, 8, 1e5, hyper, 7);
  for (auto _ : state) {
    auto ga = scm::gaussian_approximation(layout, panel, hyper);
    benchmark::DoNotOptimize(ga.mode.data());
  }
}
BENCHMARK(BM_GaussianApproximation)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_McmcIterations(benchmark::State& state) {
  const scm::AreaGraph graph = scm::grid_graph(3, 4);
  const scm::ModelConfig cfg;
  const scm::LatentLayout layout(cfg, graph, 8);
  const auto [panel, truth] = scm::simulate(cfg, graph, 8, 1e5, truth_hyper(layout), 11);
  scm::FitSettings settings;
  settings.burn_in = 0;
  settings.n_samples = 100;
  settings.thin = 1;
  for (auto _ : state) {
    auto samples = scm::run_mcmc(cfg, graph, panel, settings);
    benchmark::DoNotOptimize(samples.latent.data());
  }
  state.SetItemsProcessed(state.iterations() * settings.n_samples);
}
BENCHMARK(BM_McmcIterations)->Unit(benchmark::kMillisecond);

void BM_NationalDraws(benchmark::State& state) {
  scm::CountDraws draws;
  const int areas = 106;
  const int years = 19;
  for (int t = 0; t < years; ++t) {
    for (int i = 0; i < areas; ++i) draws.cells.push_back({i, t, scm::Disease::Incidence});
  }
  draws.counts = scm::CountMatrix::Constant(1000, areas * years, 150);
  std::vector<int> a(areas), y(years);
  for (int i = 0; i < areas; ++i) a[i] = i;
  for (int t = 0; t < years; ++t) y[t] = t;
  for (auto _ : state) benchmark::DoNotOptimize(scm::national_draws(draws, a, y).sum());
}
BENCHMARK(BM_NationalDraws)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
