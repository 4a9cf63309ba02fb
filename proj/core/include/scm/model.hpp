#pragma once

#include "scm/graph.hpp"
#include "scm/panel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scm {

enum class ModelId { Model1, Model2, Model3, AdditiveBaseline };

std::string_view to_string(ModelId id);
ModelId parse_model_id(std::string_view text);

struct ModelConfig {
  ModelId model = ModelId::Model1;
  InteractionType interaction = InteractionType::II;
  /// Model 1/2: one precision shared by the incidence and mortality interactions.
  bool shared_interaction_precision = false;
  /// Model 3: number of time-varying scalings; years past the last reuse it.
  int num_rho = 1;
  /// Upper bound of the uniform prior on every random-effect standard deviation.
  double sd_prior_upper = 10.0;
  double gamma_shape = 10.0;
  double gamma_rate = 10.0;

  /// Throws std::invalid_argument for inconsistent combinations.
  void validate(int num_years) const;
};

enum class BlockLabel { AlphaI, AlphaM, Kappa, U, GammaI, GammaM, GammaShared, ChiI, ChiM, ChiShared };
enum class PrecisionLabel { Kappa, U, GammaI, GammaM, Gamma, ChiI, ChiM, Chi };

std::string_view to_string(BlockLabel label);
std::string_view to_string(PrecisionLabel label);

/// Ridge precision standing in for the flat intercept prior.
inline constexpr double kInterceptRidge = 1e-6;

struct LatentBlock {
  BlockLabel label;
  int offset = 0;
  int length = 0;
  std::shared_ptr<const StructureMatrix> structure;  // null for intercepts
  std::shared_ptr<const ConstraintSet> constraints;  // null when unconstrained
  std::optional<PrecisionLabel> precision;           // nullopt for intercepts

  int num_constraints() const { return constraints ? constraints->rows() : 0; }
};

/// Precisions and scalings. Scalings not used by a model stay at 1.
struct HyperParams {
  std::map<PrecisionLabel, double> tau;
  double delta = 1.0;
  double varsigma = 1.0;
  std::vector<double> rho;

  double precision(PrecisionLabel label) const;
  /// Scaling for 0-based year t; years beyond the last stored value reuse it.
  double rho_at(int t) const;
};

enum class HyperKind { Precision, Delta, Varsigma, Rho };

struct HyperId {
  HyperKind kind = HyperKind::Precision;
  PrecisionLabel precision = PrecisionLabel::Kappa;
  int rho_index = 0;

  std::string name() const;
  bool operator==(const HyperId&) const = default;
};

/// Immutable description of a configured model over a fixed area graph and
/// number of years: latent blocks, constraints and hyperparameters.
class LatentLayout {
 public:
  LatentLayout(ModelConfig config, AreaGraph graph, int num_years);

  const ModelConfig& config() const { return config_; }
  const AreaGraph& graph() const { return graph_; }
  int num_areas() const { return graph_.num_areas(); }
  int num_years() const { return num_years_; }
  int size() const { return size_; }

  const std::vector<LatentBlock>& blocks() const { return blocks_; }
  bool has(BlockLabel label) const;
  const LatentBlock& block(BlockLabel label) const;

  Eigen::VectorXd read(const Eigen::VectorXd& field, BlockLabel label) const;
  void write(Eigen::VectorXd& field, BlockLabel label, const Eigen::VectorXd& values) const;

  /// Ordered hyperparameters: precisions in label order, then delta,
  /// varsigma (Model 2) and rho_1..rho_l (Model 3).
  const std::vector<HyperId>& hypers() const { return hypers_; }
  std::vector<PrecisionLabel> precisions() const;

  /// All block constraints stacked into one (m x size) matrix.
  const SparseMatrix& constraint_matrix() const { return constraints_; }

  /// C^T C restricted to constraints of rank-deficient blocks. Adding it to a
  /// precision leaves the constrained distribution unchanged while making the
  /// unconstrained system well conditioned.
  const SparseMatrix& null_space_penalty() const { return null_penalty_; }

  /// Euclidean projection of v onto the null space of the constraints.
  Eigen::VectorXd project_to_constraints(const Eigen::VectorXd& v) const;

 private:
  ModelConfig config_;
  AreaGraph graph_;
  int num_years_ = 0;
  int size_ = 0;
  std::vector<LatentBlock> blocks_;
  std::vector<HyperId> hypers_;
  SparseMatrix constraints_;
  SparseMatrix null_penalty_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;  // C C'
};

LatentLayout build_layout(const ModelConfig& config, const AreaGraph& graph, int num_years);

struct LatentState {
  Eigen::VectorXd field;
  HyperParams hyper;
};

/// All precisions 1, all scalings 1.
HyperParams default_hyper(const LatentLayout& layout);

Eigen::VectorXd to_log_vector(const LatentLayout& layout, const HyperParams& hyper);
HyperParams from_log_vector(const LatentLayout& layout, const Eigen::VectorXd& log_values);
double hyper_value(const HyperParams& hyper, const HyperId& id);
void set_hyper_value(HyperParams& hyper, const HyperId& id, double value);

/// log r_itd for one cell.
double linear_predictor(const LatentLayout& layout, const LatentState& state, int area, int year,
                        Disease d);

/// All cells, indexed like ObservationPanel: (d * T + t) * A + i.
Eigen::VectorXd linear_predictors(const LatentLayout& layout, const Eigen::VectorXd& field,
                                  const HyperParams& hyper);

/// Sparse (2AT x size) matrix J with linear_predictors = J * field.
Eigen::SparseMatrix<double, Eigen::RowMajor> design_matrix(const LatentLayout& layout,
                                                           const HyperParams& hyper);

/// Block diagonal prior precision: ridge on intercepts, tau * structure elsewhere.
SparseMatrix joint_prior_precision(const LatentLayout& layout, const HyperParams& hyper);

/// Gaussian part of the log prior: sum over blocks of
/// (len - constraints)/2 log tau - tau/2 x'Rx. Intercepts are flat.
double field_log_prior(const LatentLayout& layout, const Eigen::VectorXd& field,
                       const HyperParams& hyper);

/// Hyperprior: uniform on each sd, Gamma(shape, rate) on each scaling.
double hyper_log_prior(const LatentLayout& layout, const HyperParams& hyper);

/// Unnormalised joint log prior of field and hyperparameters.
double log_prior(const LatentLayout& layout, const LatentState& state);

}  // namespace scm
