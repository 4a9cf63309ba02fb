#include "scm/inference.hpp"

#include "scm/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace scm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_jacobian(const LatentLayout& layout, const HyperParams& hyper) {
  double acc = 0.0;
  for (const auto& id : layout.hypers()) acc += std::log(hyper_value(hyper, id));
  return acc;
}

struct Bounds {
  double lower;
  double upper;
};

Bounds bounds_for(const ModelConfig& cfg, const HyperId& id) {
  if (id.kind == HyperKind::Precision) {
    return {std::log(1.0 / (cfg.sd_prior_upper * cfg.sd_prior_upper)) + 1e-9, std::log(1e8)};
  }
  return {-5.0, 5.0};
}

}  // namespace

double laplace_log_marginal(const LatentLayout& layout, const ObservationPanel& panel, const HyperParams& hyper,
                            LikelihoodKind kind, const Eigen::VectorXd* start,
                            GaussianApproximation* approximation) {
  const double hp = hyper_log_prior(layout, hyper);
  if (!std::isfinite(hp)) return kNegInf;
  GaussianApproximation ga = gaussian_approximation(layout, panel, hyper, kind, start);
  const Eigen::VectorXd& x = ga.mode;
  const double a = x(layout.block(BlockLabel::AlphaI).offset);
  const double m = x(layout.block(BlockLabel::AlphaM).offset);
  const double value = ga.log_likelihood + field_log_prior(layout, x, hyper) -
                       0.5 * kInterceptRidge * (a * a + m * m) + hp + log_jacobian(layout, hyper) -
                       0.5 * ga.gaussian.log_det_restricted();
  if (approximation) *approximation = std::move(ga);
  return value;
}

EmpiricalBayesFit fit_empirical_bayes(const ModelConfig& config, const AreaGraph& graph,
                                      const ObservationPanel& panel, const FitSettings& settings) {
  settings.validate();
  if (graph.num_areas() != panel.num_areas()) {
    throw std::invalid_argument("graph and panel disagree on the number of areas");
  }
  panel.validate();
  if (panel.num_observed() == 0) throw std::invalid_argument("panel has no observed cells");
  auto layout = std::make_shared<const LatentLayout>(config, graph, panel.num_years());
  const ModelConfig& cfg = layout->config();
  const auto& ids = layout->hypers();
  const std::size_t nh = ids.size();

  HyperParams hyper = default_hyper(*layout);
  if (settings.initial_hyper) {
    for (const auto& id : ids) {
      try {
        set_hyper_value(hyper, id, hyper_value(*settings.initial_hyper, id));
      } catch (const std::exception&) {
      }
    }
  }
  std::vector<bool> fixed(nh, false);
  for (const auto& [name, value] : settings.fixed_hypers) {
    bool found = false;
    for (std::size_t k = 0; k < nh; ++k) {
      if (ids[k].name() == name) {
        set_hyper_value(hyper, ids[k], value);
        fixed[k] = true;
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("model has no hyperparameter named '" + name + "'");
  }

  std::vector<Bounds> bounds;
  Eigen::VectorXd theta = to_log_vector(*layout, hyper);
  for (std::size_t k = 0; k < nh; ++k) {
    bounds.push_back(bounds_for(cfg, ids[k]));
    if (!fixed[k]) {
      theta(static_cast<Eigen::Index>(k)) =
          std::clamp(theta(static_cast<Eigen::Index>(k)), bounds[k].lower, bounds[k].upper);
    }
  }

  auto to_hyper = [&](const Eigen::VectorXd& th) {
    HyperParams h = from_log_vector(*layout, th);
    for (std::size_t k = 0; k < nh; ++k) {
      if (fixed[k]) set_hyper_value(h, ids[k], hyper_value(hyper, ids[k]));
    }
    return h;
  };

  int evaluations = 0;
  GaussianApproximation best_approx =
      gaussian_approximation(*layout, panel, to_hyper(theta), settings.likelihood);
  auto evaluate = [&](const Eigen::VectorXd& th, GaussianApproximation* out) {
    ++evaluations;
    try {
      return laplace_log_marginal(*layout, panel, to_hyper(th), settings.likelihood,
                                  &best_approx.mode, out);
    } catch (const NumericalError&) {
      return kNegInf;
    }
  };

  double best = evaluate(theta, &best_approx);
  if (!std::isfinite(best)) throw NumericalError("fit_empirical_bayes: objective not finite at the start");

  double step = 1.0;
  while (step > 1e-3 && evaluations < 20000) {
    bool improved = false;
    for (std::size_t k = 0; k < nh; ++k) {
      if (fixed[k]) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      for (double dir : {1.0, -1.0}) {
        bool moved = false;
        while (true) {
          Eigen::VectorXd cand = theta;
          cand(kk) = std::clamp(theta(kk) + dir * step, bounds[k].lower, bounds[k].upper);
          if (cand(kk) == theta(kk)) break;
          GaussianApproximation ga = best_approx;
          const double f = evaluate(cand, &ga);
          if (!(f > best + 1e-10)) break;
          theta = cand;
          best = f;
          best_approx = std::move(ga);
          moved = improved = true;
        }
        if (moved) break;
      }
    }
    if (!improved) step *= 0.5;
  }

  EmpiricalBayesFit fit{layout, to_hyper(theta), best_approx, best, evaluations};
  return fit;
}

PosteriorSamples sample_approximation(const EmpiricalBayesFit& fit, int draws, std::uint64_t seed, int first_year) {
  if (draws < 1) throw std::invalid_argument("sample_approximation: draws must be >= 1");
  PosteriorSamples out;
  out.layout = fit.layout;
  out.first_year = first_year;
  const auto& ids = fit.layout->hypers();
  out.latent.resize(draws, fit.layout->size());
  out.hyper.resize(draws, static_cast<Eigen::Index>(ids.size()));
  Rng rng(seed);
  for (int s = 0; s < draws; ++s) {
    out.latent.row(s) = fit.approximation.gaussian.sample(rng).transpose();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out.hyper(s, static_cast<Eigen::Index>(k)) = hyper_value(fit.hyper, ids[k]);
    }
  }
  for (const auto& id : ids) out.diagnostics.hyper_names.push_back(id.name());
  out.diagnostics.likelihood_terms = 0;
  return out;
}

}  // namespace scm
