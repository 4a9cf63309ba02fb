#pragma once

#include "scm/gaussian.hpp"
#include "scm/model.hpp"
#include "scm/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scm {

enum class FitMode { MCMC, EmpiricalBayesLaplace };

/// Quadratic replaces the Poisson term by its second-order expansion around
/// log(O/n) with weight O, making the field posterior exactly Gaussian. Used
/// to check the field update in the Gaussian limit.
enum class LikelihoodKind { Poisson, Quadratic };

std::string_view to_string(FitMode mode);
FitMode parse_fit_mode(std::string_view text);

struct FitSettings {
  int burn_in = 5000;
  int n_samples = 2000;
  int thin = 5;
  std::uint64_t rng_seed = 20240101;
  FitMode mode = FitMode::MCMC;
  LikelihoodKind likelihood = LikelihoodKind::Poisson;

  /// Initial random-walk sd on log-hyperparameters (all blocks).
  double initial_step = 0.3;
  /// Step sizes are tuned during burn-in toward 20-50% acceptance.
  bool tune_steps = true;
  /// Field proposal: x' = m + rho (x - m) + sqrt(1 - rho^2) e around the
  /// Gaussian approximation m. rho = 0 is an independence proposal. Tuned
  /// during burn-in when `tune_field` is set.
  double field_rho = 0.0;
  bool tune_field = true;

  /// Hyperparameters (by name, e.g. "tau_u", "delta") held at fixed values.
  std::map<std::string, double> fixed_hypers;
  std::optional<HyperParams> initial_hyper;

  /// Draws generated from the Gaussian approximation in empirical-Bayes mode.
  int eb_draws = 1000;

  void validate() const;
};

struct LikelihoodValue {
  double value = 0.0;
  int terms = 0;  // number of observed cells summed
};

/// Sum over observed cells of log Poisson(O | n exp(eta)), including -log O!.
LikelihoodValue log_likelihood(const ObservationPanel& panel, const Eigen::VectorXd& eta,
                               LikelihoodKind kind = LikelihoodKind::Poisson);

struct GaussianApproximation {
  Eigen::VectorXd mode;
  /// Prior precision plus likelihood curvature at the mode.
  SparseMatrix precision;
  /// Constrained Gaussian centred at the mode (factor includes the
  /// null-space penalty, which does not change the constrained law).
  ConstrainedGaussian gaussian;
  int iterations = 0;
  double gradient_norm = 0.0;  // relative, projected onto the constraint subspace
  double log_likelihood = 0.0;
};

/// Newton iterations for the constrained mode of the field given hyperparameters.
/// Throws NumericalError when the iteration fails to converge in 50 steps.
GaussianApproximation gaussian_approximation(const LatentLayout& layout, const ObservationPanel& panel,
                                             const HyperParams& hyper,
                                             LikelihoodKind kind = LikelihoodKind::Poisson,
                                             const Eigen::VectorXd* start = nullptr);

struct ChainDiagnostics {
  std::vector<std::string> hyper_names;
  std::vector<double> hyper_acceptance;
  std::vector<double> hyper_ess;  // on the log scale
  std::vector<double> final_steps;
  double field_acceptance = 0.0;
  double field_rho = 0.0;
  int likelihood_terms = 0;
  std::vector<std::string> warnings;
};

struct PosteriorSamples {
  std::shared_ptr<const LatentLayout> layout;
  int first_year = 0;
  Eigen::MatrixXd latent;  // draws x layout size
  Eigen::MatrixXd hyper;   // draws x hyperparameters, natural scale
  ChainDiagnostics diagnostics;

  int size() const { return static_cast<int>(latent.rows()); }
  int num_areas() const { return layout->num_areas(); }
  int num_years() const { return layout->num_years(); }
  HyperParams hyper_at(int draw) const;
  Eigen::VectorXd hyper_column(const std::string& name) const;

  /// draws x cells matrix of log r_itd.
  Eigen::MatrixXd log_rate_draws(const std::vector<Cell>& cells) const;
};

/// Blocked sampler: Metropolis-Hastings field update with the constrained
/// Gaussian approximation as proposal, then Gaussian random-walk updates of
/// each log-precision and log-scaling.
PosteriorSamples run_mcmc(const ModelConfig& config, const AreaGraph& graph,
                          const ObservationPanel& panel, const FitSettings& settings);

struct EmpiricalBayesFit {
  std::shared_ptr<const LatentLayout> layout;
  HyperParams hyper;
  GaussianApproximation approximation;
  double log_marginal = 0.0;
  int evaluations = 0;
};

/// Laplace approximation of log p(theta | y) up to a constant, with theta on
/// the log scale (includes the log-Jacobian).
double laplace_log_marginal(const LatentLayout& layout, const ObservationPanel& panel,
                            const HyperParams& hyper, LikelihoodKind kind = LikelihoodKind::Poisson,
                            const Eigen::VectorXd* start = nullptr,
                            GaussianApproximation* approximation = nullptr);

/// Coordinate search for the maximiser of laplace_log_marginal.
EmpiricalBayesFit fit_empirical_bayes(const ModelConfig& config, const AreaGraph& graph,
                                      const ObservationPanel& panel, const FitSettings& settings);

/// `draws` constrained Gaussian draws at the empirical-Bayes hyperparameters.
PosteriorSamples sample_approximation(const EmpiricalBayesFit& fit, int draws, std::uint64_t seed,
                                      int first_year = 0);

/// Dispatches on settings.mode.
PosteriorSamples fit_model(const ModelConfig& config, const AreaGraph& graph,
                           const ObservationPanel& panel, const FitSettings& settings);

struct CountDraws {
  std::vector<Cell> cells;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // draws x cells
};

/// C^s ~ Poisson(n_itd r^s_itd) for every retained draw and requested cell.
CountDraws predictive_counts(const PosteriorSamples& samples, const ObservationPanel& panel,
                             const std::vector<Cell>& cells, std::uint64_t seed);

/// Extends the panel by `horizon` years of missing counts with projected
/// populations, rebuilds the temporal structures and fits.
PosteriorSamples forecast_horizon(const ModelConfig& config, const AreaGraph& graph,
                                  const ObservationPanel& panel, int horizon,
                                  const PopulationProjection& projection, const FitSettings& settings);

}  // namespace scm
