#include "scm/inference.hpp"

#include "scm/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace scm {

namespace {

constexpr int kMaxNewtonIterations = 50;
constexpr double kGradientTolerance = 1e-8;
constexpr int kAdaptWindow = 50;

void check_dimensions(const LatentLayout& layout, const ObservationPanel& panel) {
  if (panel.num_areas() != layout.num_areas() || panel.num_years() != layout.num_years()) {
    throw std::invalid_argument("panel dimensions do not match the model layout");
  }
}

Eigen::VectorXd initial_field(const LatentLayout& layout, const ObservationPanel& panel) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.size());
  double level[kNumDiseases] = {0.0, 0.0};
  bool known[kNumDiseases] = {false, false};
  for (int d = 0; d < kNumDiseases; ++d) {
    double counts = 0.0;
    double pop = 0.0;
    for (int t = 0; t < panel.num_years(); ++t) {
      for (int i = 0; i < panel.num_areas(); ++i) {
        if (auto c = panel.count(i, t, static_cast<Disease>(d))) {
          counts += static_cast<double>(*c);
          pop += panel.population(i, t, static_cast<Disease>(d));
        }
      }
    }
    if (pop > 0.0) {
      level[d] = std::log(std::max(counts, 0.5) / pop);
      known[d] = true;
    }
  }
  if (!known[0] && known[1]) level[0] = level[1];
  if (!known[1] && known[0]) level[1] = level[0];
  x(layout.block(BlockLabel::AlphaI).offset) = level[0];
  x(layout.block(BlockLabel::AlphaM).offset) = level[1];
  return x;
}

// Per-cell first and second derivatives of the log-likelihood in eta.
void likelihood_derivatives(const ObservationPanel& panel, const Eigen::VectorXd& eta, LikelihoodKind kind,
                            Eigen::VectorXd& grad, Eigen::VectorXd& curv) {
  const int n = panel.num_cells();
  grad.setZero(n);
  curv.setZero(n);
  for (int c = 0; c < n; ++c) {
    if (!panel.observed(c)) continue;
    const double o = static_cast<double>(panel.count_at(c));
    if (kind == LikelihoodKind::Poisson) {
      const double mu = panel.population_at(c) * std::exp(eta(c));
      grad(c) = o - mu;
      curv(c) = mu;
    } else {
      const double w = std::max(o, 0.5);
      const double target = std::log(w / panel.population_at(c));
      grad(c) = -w * (eta(c) - target);
      curv(c) = w;
    }
  }
}

double intercept_quadratic(const LatentLayout& layout, const Eigen::VectorXd& x) {
  const double a = x(layout.block(BlockLabel::AlphaI).offset);
  const double m = x(layout.block(BlockLabel::AlphaM).offset);
  return a * a + m * m;
}

// x'R x summed over every block sharing a precision.
std::map<PrecisionLabel, double> block_quadratics(const LatentLayout& layout, const Eigen::VectorXd& x) {
  std::map<PrecisionLabel, double> out;
  for (const auto& b : layout.blocks()) {
    if (!b.structure) continue;
    const auto seg = x.segment(b.offset, b.length);
    out[*b.precision] += seg.dot(b.structure->entries * seg);
  }
  return out;
}

std::map<PrecisionLabel, double> effective_dims(const LatentLayout& layout) {
  std::map<PrecisionLabel, double> out;
  for (const auto& b : layout.blocks()) {
    if (b.structure) out[*b.precision] += b.length - b.num_constraints();
  }
  return out;
}

// -1/2 x' Q_prior x (including the intercept ridge) from cached quadratics.
double field_kernel(const LatentLayout& layout, const std::map<PrecisionLabel, double>& quads,
                    const HyperParams& hyper, const Eigen::VectorXd& x) {
  double acc = -0.5 * kInterceptRidge * intercept_quadratic(layout, x);
  for (const auto& [label, q] : quads) acc -= 0.5 * hyper.precision(label) * q;
  return acc;
}

double hyper_prior_term(const ModelConfig& cfg, const HyperId& id, double value) {
  if (id.kind == HyperKind::Precision) return uniform_sd_log_pdf(value, cfg.sd_prior_upper);
  return gamma_log_pdf(value, cfg.gamma_shape, cfg.gamma_rate);
}

std::vector<bool> apply_fixed(const LatentLayout& layout, const FitSettings& settings, HyperParams& hyper) {
  const auto& ids = layout.hypers();
  std::vector<bool> fixed(ids.size(), false);
  for (const auto& [name, value] : settings.fixed_hypers) {
    bool found = false;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k].name() == name) {
        if (!(value > 0.0)) throw std::invalid_argument("fixed hyperparameter " + name + " must be positive");
        set_hyper_value(hyper, ids[k], value);
        fixed[k] = true;
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("model has no hyperparameter named '" + name + "'");
  }
  return fixed;
}

HyperParams starting_hyper(const LatentLayout& layout, const FitSettings& settings) {
  HyperParams hyper = default_hyper(layout);
  if (settings.initial_hyper) {
    for (const auto& id : layout.hypers()) {
      double v = 0.0;
      try {
        v = hyper_value(*settings.initial_hyper, id);
      } catch (const std::exception&) {
        continue;
      }
      set_hyper_value(hyper, id, v);
    }
  }
  return hyper;
}

void require_observations(const ObservationPanel& panel, std::vector<std::string>* warnings) {
  panel.validate();
  if (panel.num_observed() == 0) throw std::invalid_argument("panel has no observed cells");
  for (int d = 0; d < kNumDiseases; ++d) {
    if (panel.num_observed(static_cast<Disease>(d)) == 0 && warnings) {
      warnings->push_back(std::string("no observed ") + (d == 0 ? "incidence" : "mortality") +
                          " cells; those blocks are driven by their priors");
    }
  }
}

}  // namespace

std::string_view to_string(FitMode mode) {
  return mode == FitMode::MCMC ? "mcmc" : "eb";
}

FitMode parse_fit_mode(std::string_view text) {
  if (text == "mcmc" || text == "MCMC") return FitMode::MCMC;
  if (text == "eb" || text == "laplace" || text == "EmpiricalBayesLaplace") {
    return FitMode::EmpiricalBayesLaplace;
  }
  throw std::invalid_argument("unknown fit mode '" + std::string(text) + "'");
}

void FitSettings::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
  if (eb_draws < 1) throw std::invalid_argument("eb_draws must be >= 1");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
  if (!(field_rho >= 0.0 && field_rho < 1.0)) throw std::invalid_argument("field_rho must lie in [0, 1)");
}

LikelihoodValue log_likelihood(const ObservationPanel& panel, const Eigen::VectorXd& eta, LikelihoodKind kind) {
  LikelihoodValue out;
  for (int c = 0; c < panel.num_cells(); ++c) {
    if (!panel.observed(c)) continue;
    const double o = static_cast<double>(panel.count_at(c));
    if (kind == LikelihoodKind::Poisson) {
      const double n = panel.population_at(c);
      out.value += o * (std::log(n) + eta(c)) - n * std::exp(eta(c)) - std::lgamma(o + 1.0);
    } else {
      const double w = std::max(o, 0.5);
      const double r = eta(c) - std::log(w / panel.population_at(c));
      out.value += -0.5 * w * r * r;
    }
    ++out.terms;
  }
  return out;
}

GaussianApproximation gaussian_approximation(const LatentLayout& layout, const ObservationPanel& panel,
                                             const HyperParams& hyper, LikelihoodKind kind,
                                             const Eigen::VectorXd* start) {
  check_dimensions(layout, panel);
  if (panel.num_observed() == 0) throw std::invalid_argument("gaussian_approximation: no observed cells");

  const auto j = design_matrix(layout, hyper);
  const SparseMatrix jt = j.transpose();
  const SparseMatrix q_prior = joint_prior_precision(layout, hyper);
  const SparseMatrix& constraints = layout.constraint_matrix();

  Eigen::VectorXd x = layout.project_to_constraints(start ? *start : initial_field(layout, panel));

  Eigen::VectorXd grad_eta;
  Eigen::VectorXd curv;
  double scale = 1.0;
  {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(panel.num_cells());
    for (int c = 0; c < panel.num_cells(); ++c) {
      if (panel.observed(c)) counts(c) = static_cast<double>(panel.count_at(c));
    }
    scale += (jt * counts).norm();
  }

  auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd eta = j * v;
    return log_likelihood(panel, eta, kind).value - 0.5 * v.dot(q_prior * v);
  };

  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const Eigen::VectorXd eta = j * x;
    likelihood_derivatives(panel, eta, kind, grad_eta, curv);
    const Eigen::VectorXd g = jt * grad_eta - q_prior * x;
    const double rel = layout.project_to_constraints(g).norm() / scale;

    const SparseMatrix h = q_prior + SparseMatrix(jt * curv.asDiagonal() * j);
    ConstrainedGaussian cg(x, SparseMatrix(h + layout.null_space_penalty()), constraints);
    if (rel < kGradientTolerance) {
      const double ll = log_likelihood(panel, eta, kind).value;
      return GaussianApproximation{cg.mean(), h, std::move(cg), it, rel, ll};
    }

    const Eigen::VectorXd step = cg.correct(x + cg.solve(g)) - x;
    const double f0 = objective(x);
    double s = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, s *= 0.5) {
      const Eigen::VectorXd cand = x + s * step;
      const double f = objective(cand);
      if (std::isfinite(f) && f >= f0 - 1e-12 * std::abs(f0)) {
        x = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericalError("gaussian_approximation: step halving failed");
    if (s * step.lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      // Round-off floor: the step no longer moves the iterate.
      const Eigen::VectorXd eta_final = j * x;
      likelihood_derivatives(panel, eta_final, kind, grad_eta, curv);
      const Eigen::VectorXd g_final = jt * grad_eta - q_prior * x;
      const SparseMatrix h_final = q_prior + SparseMatrix(jt * curv.asDiagonal() * j);
      ConstrainedGaussian cg_final(x, SparseMatrix(h_final + layout.null_space_penalty()), constraints);
      return GaussianApproximation{cg_final.mean(), h_final, std::move(cg_final), it + 1,
                                   layout.project_to_constraints(g_final).norm() / scale,
                                   log_likelihood(panel, eta_final, kind).value};
    }
  }
  throw NumericalError("gaussian_approximation: Newton iteration did not converge in 50 steps");
}

HyperParams PosteriorSamples::hyper_at(int draw) const {
  HyperParams h = default_hyper(*layout);
  const auto& ids = layout->hypers();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    set_hyper_value(h, ids[k], hyper(draw, static_cast<Eigen::Index>(k)));
  }
  return h;
}

Eigen::VectorXd PosteriorSamples::hyper_column(const std::string& name) const {
  const auto& ids = layout->hypers();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k].name() == name) return hyper.col(static_cast<Eigen::Index>(k));
  }
  throw std::out_of_range("no hyperparameter named " + name);
}

Eigen::MatrixXd PosteriorSamples::log_rate_draws(const std::vector<Cell>& cells) const {
  Eigen::MatrixXd out(size(), static_cast<Eigen::Index>(cells.size()));
  for (int s = 0; s < size(); ++s) {
    const LatentState state{latent.row(s).transpose(), hyper_at(s)};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      if (cell.area < 0 || cell.area >= num_areas() || cell.year < 0 || cell.year >= num_years()) {
        throw std::out_of_range("log_rate_draws: cell outside the fitted grid");
      }
      out(s, static_cast<Eigen::Index>(c)) = linear_predictor(*layout, state, cell.area, cell.year, cell.disease);
    }
  }
  return out;
}

PosteriorSamples run_mcmc(const ModelConfig& config, const AreaGraph& graph, const ObservationPanel& panel,
                          const FitSettings& settings) {
  settings.validate();
  if (graph.num_areas() != panel.num_areas()) {
    throw std::invalid_argument("graph and panel disagree on the number of areas");
  }
  auto layout = std::make_shared<const LatentLayout>(config, graph, panel.num_years());
  const ModelConfig& cfg = layout->config();

  PosteriorSamples out;
  out.layout = layout;
  out.first_year = panel.first_year();
  require_observations(panel, &out.diagnostics.warnings);

  Rng rng(settings.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const auto& ids = layout->hypers();
  const std::size_t nh = ids.size();
  HyperParams hyper = starting_hyper(*layout, settings);
  const std::vector<bool> fixed = apply_fixed(*layout, settings, hyper);
  const auto eff_dims = effective_dims(*layout);

  GaussianApproximation approx = gaussian_approximation(*layout, panel, hyper, settings.likelihood);
  bool stale = false;
  Eigen::VectorXd x = approx.mode;
  Eigen::VectorXd eta = linear_predictors(*layout, x, hyper);
  LikelihoodValue ll = log_likelihood(panel, eta, settings.likelihood);
  auto quads = block_quadratics(*layout, x);

  std::vector<double> steps(nh, settings.initial_step);
  double rho = settings.field_rho;
  std::vector<int> window_acc(nh, 0);
  std::vector<int> kept_acc(nh, 0);
  std::vector<long> total_acc(nh, 0);
  int field_window_acc = 0;
  int field_kept_acc = 0;
  long field_total_acc = 0;

  const int total = settings.burn_in + settings.n_samples * settings.thin;
  out.latent.resize(settings.n_samples, layout->size());
  out.hyper.resize(settings.n_samples, static_cast<Eigen::Index>(nh));
  int stored = 0;

  for (int iter = 0; iter < total; ++iter) {
    const bool burning = iter < settings.burn_in;

    // (a) field: MH with the constrained Gaussian approximation at the current hypers.
    if (stale) {
      approx = gaussian_approximation(*layout, panel, hyper, settings.likelihood, &approx.mode);
      stale = false;
    }
    {
      const Eigen::VectorXd prop = approx.gaussian.sample_around(x, rho, rng);
      const Eigen::VectorXd eta_p = linear_predictors(*layout, prop, hyper);
      const LikelihoodValue ll_p = log_likelihood(panel, eta_p, settings.likelihood);
      const auto quads_p = block_quadratics(*layout, prop);
      const double log_ratio = (ll_p.value + field_kernel(*layout, quads_p, hyper, prop)) -
                               (ll.value + field_kernel(*layout, quads, hyper, x)) +
                               approx.gaussian.log_kernel(x) - approx.gaussian.log_kernel(prop);
      if (std::log(uniform(rng)) < log_ratio) {
        x = prop;
        eta = eta_p;
        ll = ll_p;
        quads = quads_p;
        ++field_window_acc;
        ++field_total_acc;
        if (!burning) ++field_kept_acc;
      }
    }

    // (b) log-hyperparameters by Gaussian random walk.
    for (std::size_t k = 0; k < nh; ++k) {
      if (fixed[k]) continue;
      const HyperId& id = ids[k];
      const double cur = hyper_value(hyper, id);
      const double log_prop = std::log(cur) + steps[k] * normal(rng);
      const double prop = std::exp(log_prop);
      double log_ratio = hyper_prior_term(cfg, id, prop) - hyper_prior_term(cfg, id, cur) +
                         (log_prop - std::log(cur));
      Eigen::VectorXd eta_p;
      LikelihoodValue ll_p;
      if (id.kind == HyperKind::Precision) {
        const double q = quads.count(id.precision) ? quads.at(id.precision) : 0.0;
        const double dim = eff_dims.at(id.precision);
        log_ratio += 0.5 * dim * (log_prop - std::log(cur)) - 0.5 * (prop - cur) * q;
      } else {
        HyperParams h2 = hyper;
        set_hyper_value(h2, id, prop);
        eta_p = linear_predictors(*layout, x, h2);
        ll_p = log_likelihood(panel, eta_p, settings.likelihood);
        log_ratio += ll_p.value - ll.value;
      }
      if (std::isfinite(log_ratio) && std::log(uniform(rng)) < log_ratio) {
        set_hyper_value(hyper, id, prop);
        if (id.kind != HyperKind::Precision) {
          eta = std::move(eta_p);
          ll = ll_p;
        }
        stale = true;
        ++window_acc[k];
        ++total_acc[k];
        if (!burning) ++kept_acc[k];
      }
    }

    if (burning && (iter + 1) % kAdaptWindow == 0) {
      if (settings.tune_steps) {
        for (std::size_t k = 0; k < nh; ++k) {
          const double rate = static_cast<double>(window_acc[k]) / kAdaptWindow;
          if (rate < 0.2) steps[k] *= 0.75;
          if (rate > 0.5) steps[k] *= 1.3;
          window_acc[k] = 0;
        }
      }
      if (settings.tune_field) {
        const double rate = static_cast<double>(field_window_acc) / kAdaptWindow;
        if (rate < 0.2) rho = std::min(0.98, rho + 0.3 * (1.0 - rho));
        if (rate > 0.6) rho = rho < 0.05 ? 0.0 : 0.5 * rho;
      }
      field_window_acc = 0;
    }

    if (!burning && (iter - settings.burn_in + 1) % settings.thin == 0) {
      out.latent.row(stored) = x.transpose();
      for (std::size_t k = 0; k < nh; ++k) {
        out.hyper(stored, static_cast<Eigen::Index>(k)) = hyper_value(hyper, ids[k]);
      }
      ++stored;
    }
  }

  auto& diag = out.diagnostics;
  const double kept_iters = static_cast<double>(settings.n_samples * settings.thin);
  diag.field_acceptance = field_kept_acc / kept_iters;
  diag.field_rho = rho;
  diag.likelihood_terms = ll.terms;
  diag.final_steps = steps;
  if (field_total_acc == 0) diag.warnings.push_back("field block never accepted a proposal");
  for (std::size_t k = 0; k < nh; ++k) {
    diag.hyper_names.push_back(ids[k].name());
    diag.hyper_acceptance.push_back(fixed[k] ? 0.0 : kept_acc[k] / kept_iters);
    const Eigen::VectorXd col = out.hyper.col(static_cast<Eigen::Index>(k)).array().log();
    diag.hyper_ess.push_back(effective_sample_size(std::span<const double>(col.data(), col.size())));
    if (!fixed[k] && total_acc[k] == 0) {
      diag.warnings.push_back(ids[k].name() + " never accepted a proposal");
    }
  }
  return out;
}

CountDraws predictive_counts(const PosteriorSamples& samples, const ObservationPanel& panel,
                             const std::vector<Cell>& cells, std::uint64_t seed) {
  if (panel.num_areas() != samples.num_areas() || panel.num_years() != samples.num_years()) {
    throw std::invalid_argument("predictive_counts: panel does not match the fitted grid");
  }
  CountDraws out;
  out.cells = cells;
  out.counts.resize(samples.size(), static_cast<Eigen::Index>(cells.size()));
  const Eigen::MatrixXd log_rates = samples.log_rate_draws(cells);
  Rng rng(seed);
  for (int s = 0; s < samples.size(); ++s) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      const double mu = panel.population(cell.area, cell.year, cell.disease) *
                        std::exp(log_rates(s, static_cast<Eigen::Index>(c)));
      if (!std::isfinite(mu) || mu > 1e15) {
        throw NumericalError("predictive_counts: predictive mean is not finite");
      }
      std::poisson_distribution<std::int64_t> poisson(mu);
      out.counts(s, static_cast<Eigen::Index>(c)) = poisson(rng);
    }
  }
  return out;
}

PosteriorSamples fit_model(const ModelConfig& config, const AreaGraph& graph, const ObservationPanel& panel,
                           const FitSettings& settings) {
  if (settings.mode == FitMode::MCMC) return run_mcmc(config, graph, panel, settings);
  const EmpiricalBayesFit fit = fit_empirical_bayes(config, graph, panel, settings);
  PosteriorSamples out = sample_approximation(fit, settings.eb_draws, settings.rng_seed, panel.first_year());
  const Eigen::VectorXd eta = linear_predictors(*fit.layout, fit.approximation.mode, fit.hyper);
  out.diagnostics.likelihood_terms = log_likelihood(panel, eta, settings.likelihood).terms;
  return out;
}

PosteriorSamples forecast_horizon(const ModelConfig& config, const AreaGraph& graph,
                                  const ObservationPanel& panel, int horizon,
                                  const PopulationProjection& projection, const FitSettings& settings) {
  if (horizon < 0) throw std::invalid_argument("forecast_horizon: horizon must be non-negative");
  if (horizon == 0) return fit_model(config, graph, panel, settings);
  return fit_model(config, graph, extend_panel(panel, horizon, projection), settings);
}

}  // namespace scm
