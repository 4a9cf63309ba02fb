#include "scm/model.hpp"

#include "scm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scm {

namespace {

using Triplet = Eigen::Triplet<double>;

PrecisionLabel precision_for(BlockLabel label, const ModelConfig& config) {
  switch (label) {
    case BlockLabel::Kappa: return PrecisionLabel::Kappa;
    case BlockLabel::U: return PrecisionLabel::U;
    case BlockLabel::GammaI: return PrecisionLabel::GammaI;
    case BlockLabel::GammaM: return PrecisionLabel::GammaM;
    case BlockLabel::GammaShared: return PrecisionLabel::Gamma;
    case BlockLabel::ChiI:
      return config.shared_interaction_precision ? PrecisionLabel::Chi : PrecisionLabel::ChiI;
    case BlockLabel::ChiM:
      return config.shared_interaction_precision ? PrecisionLabel::Chi : PrecisionLabel::ChiM;
    case BlockLabel::ChiShared: return PrecisionLabel::Chi;
    default: break;
  }
  throw std::logic_error("precision_for: intercept block has no precision");
}

}  // namespace

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::Model1: return "model1";
    case ModelId::Model2: return "model2";
    case ModelId::Model3: return "model3";
    case ModelId::AdditiveBaseline: return "additive";
  }
  return "?";
}

ModelId parse_model_id(std::string_view text) {
  if (text == "model1" || text == "Model1" || text == "1") return ModelId::Model1;
  if (text == "model2" || text == "Model2" || text == "2") return ModelId::Model2;
  if (text == "model3" || text == "Model3" || text == "3") return ModelId::Model3;
  if (text == "additive" || text == "AdditiveBaseline" || text == "baseline") {
    return ModelId::AdditiveBaseline;
  }
  throw std::invalid_argument("unknown model '" + std::string(text) + "'");
}

void ModelConfig::validate(int num_years) const {
  if (model == ModelId::Model3 && interaction == InteractionType::None) {
    throw std::invalid_argument("Model3 requires a space-time interaction type");
  }
  if (model == ModelId::AdditiveBaseline && interaction != InteractionType::None) {
    throw std::invalid_argument("the additive baseline has no interaction; use interaction = none");
  }
  if (model == ModelId::Model3 && (num_rho < 1 || num_rho > num_years)) {
    throw std::invalid_argument("num_rho must lie in [1, T]");
  }
  if (!(sd_prior_upper > 0.0)) throw std::invalid_argument("sd_prior_upper must be positive");
  if (!(gamma_shape > 0.0) || !(gamma_rate > 0.0)) {
    throw std::invalid_argument("gamma prior parameters must be positive");
  }
}

std::string_view to_string(BlockLabel label) {
  switch (label) {
    case BlockLabel::AlphaI: return "alpha_I";
    case BlockLabel::AlphaM: return "alpha_M";
    case BlockLabel::Kappa: return "kappa";
    case BlockLabel::U: return "u";
    case BlockLabel::GammaI: return "gamma_I";
    case BlockLabel::GammaM: return "gamma_M";
    case BlockLabel::GammaShared: return "gamma_shared";
    case BlockLabel::ChiI: return "chi_I";
    case BlockLabel::ChiM: return "chi_M";
    case BlockLabel::ChiShared: return "chi_shared";
  }
  return "?";
}

std::string_view to_string(PrecisionLabel label) {
  switch (label) {
    case PrecisionLabel::Kappa: return "tau_kappa";
    case PrecisionLabel::U: return "tau_u";
    case PrecisionLabel::GammaI: return "tau_gamma_I";
    case PrecisionLabel::GammaM: return "tau_gamma_M";
    case PrecisionLabel::Gamma: return "tau_gamma";
    case PrecisionLabel::ChiI: return "tau_chi_I";
    case PrecisionLabel::ChiM: return "tau_chi_M";
    case PrecisionLabel::Chi: return "tau_chi";
  }
  return "?";
}

double HyperParams::precision(PrecisionLabel label) const {
  auto it = tau.find(label);
  if (it == tau.end()) {
    throw std::out_of_range("HyperParams: no value for " + std::string(to_string(label)));
  }
  return it->second;
}

double HyperParams::rho_at(int t) const {
  if (rho.empty()) return 1.0;
  return rho[static_cast<std::size_t>(std::min<int>(t, static_cast<int>(rho.size()) - 1))];
}

std::string HyperId::name() const {
  switch (kind) {
    case HyperKind::Precision: return std::string(to_string(precision));
    case HyperKind::Delta: return "delta";
    case HyperKind::Varsigma: return "varsigma";
    case HyperKind::Rho: return "rho_" + std::to_string(rho_index + 1);
  }
  return "?";
}

LatentLayout::LatentLayout(ModelConfig config, AreaGraph graph, int num_years)
    : config_(config), graph_(std::move(graph)), num_years_(num_years) {
  const int A = graph_.num_areas();
  const int T = num_years;
  if (A < 2 || T < 2) throw std::invalid_argument("LatentLayout: need A >= 2 and T >= 2");
  config_.validate(T);

  auto r_kappa = std::make_shared<const StructureMatrix>(icar_structure(graph_));
  auto r_gamma = std::make_shared<const StructureMatrix>(rw1_structure(T));
  auto eye_a = std::make_shared<const StructureMatrix>(iid_structure(A));
  auto kappa_con = std::make_shared<const ConstraintSet>(icar_constraints(graph_));

  std::shared_ptr<const StructureMatrix> q_chi;
  std::shared_ptr<const ConstraintSet> chi_con;
  if (config_.interaction != InteractionType::None) {
    q_chi = std::make_shared<const StructureMatrix>(
        interaction_structure(config_.interaction, *r_gamma, *r_kappa));
    chi_con = std::make_shared<const ConstraintSet>(constraints_for(config_.interaction, graph_, T));
  }

  auto add = [&](BlockLabel label, int length, std::shared_ptr<const StructureMatrix> s,
                 std::shared_ptr<const ConstraintSet> c) {
    LatentBlock b{label, size_, length, std::move(s), std::move(c), std::nullopt};
    if (b.structure) b.precision = precision_for(label, config_);
    blocks_.push_back(std::move(b));
    size_ += length;
  };
  auto gamma_con = [&](std::string label) {
    return std::make_shared<const ConstraintSet>(sum_to_zero(T, std::move(label)));
  };

  add(BlockLabel::AlphaI, 1, nullptr, nullptr);
  add(BlockLabel::AlphaM, 1, nullptr, nullptr);
  add(BlockLabel::Kappa, A, r_kappa, kappa_con);
  add(BlockLabel::U, A, eye_a, nullptr);

  const bool with_chi = config_.interaction != InteractionType::None;
  switch (config_.model) {
    case ModelId::Model1:
    case ModelId::AdditiveBaseline:
      add(BlockLabel::GammaI, T, r_gamma, gamma_con("gamma_I"));
      add(BlockLabel::GammaM, T, r_gamma, gamma_con("gamma_M"));
      if (with_chi) {
        add(BlockLabel::ChiI, A * T, q_chi, chi_con);
        add(BlockLabel::ChiM, A * T, q_chi, chi_con);
      }
      break;
    case ModelId::Model2:
      add(BlockLabel::GammaShared, T, r_gamma, gamma_con("gamma_shared"));
      if (with_chi) {
        add(BlockLabel::ChiI, A * T, q_chi, chi_con);
        add(BlockLabel::ChiM, A * T, q_chi, chi_con);
      }
      break;
    case ModelId::Model3:
      add(BlockLabel::GammaM, T, r_gamma, gamma_con("gamma_M"));
      add(BlockLabel::ChiShared, A * T, q_chi, chi_con);
      break;
  }

  // Hyperparameters in a fixed order.
  for (auto p : precisions()) hypers_.push_back(HyperId{HyperKind::Precision, p, 0});
  hypers_.push_back(HyperId{HyperKind::Delta, PrecisionLabel::Kappa, 0});
  if (config_.model == ModelId::Model2) {
    hypers_.push_back(HyperId{HyperKind::Varsigma, PrecisionLabel::Kappa, 0});
  }
  if (config_.model == ModelId::Model3) {
    for (int l = 0; l < config_.num_rho; ++l) {
      hypers_.push_back(HyperId{HyperKind::Rho, PrecisionLabel::Kappa, l});
    }
  }

  // Global constraint matrix and the null-space penalty.
  std::vector<Triplet> con;
  std::vector<Triplet> pen;
  int row = 0;
  for (const auto& b : blocks_) {
    if (!b.constraints) continue;
    const Eigen::MatrixXd& c = b.constraints->matrix;
    const bool rank_deficient = b.structure && b.structure->null_dim > 0;
    for (Eigen::Index r = 0; r < c.rows(); ++r, ++row) {
      std::vector<int> support;
      for (Eigen::Index k = 0; k < c.cols(); ++k) {
        if (c(r, k) != 0.0) {
          con.emplace_back(row, b.offset + static_cast<int>(k), c(r, k));
          support.push_back(static_cast<int>(k));
        }
      }
      if (!rank_deficient) continue;
      for (int p : support) {
        for (int q : support) pen.emplace_back(b.offset + p, b.offset + q, c(r, p) * c(r, q));
      }
    }
  }
  constraints_.resize(row, size_);
  constraints_.setFromTriplets(con.begin(), con.end());
  null_penalty_.resize(size_, size_);
  null_penalty_.setFromTriplets(pen.begin(), pen.end());
  if (row > 0) gram_.compute(Eigen::MatrixXd(constraints_ * constraints_.transpose()));
}

Eigen::VectorXd LatentLayout::project_to_constraints(const Eigen::VectorXd& v) const {
  if (constraints_.rows() == 0) return v;
  return v - constraints_.transpose() * gram_.solve(constraints_ * v);
}

LatentLayout build_layout(const ModelConfig& config, const AreaGraph& graph, int num_years) {
  return LatentLayout(config, graph, num_years);
}

bool LatentLayout::has(BlockLabel label) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const auto& b) { return b.label == label; });
}

const LatentBlock& LatentLayout::block(BlockLabel label) const {
  for (const auto& b : blocks_) {
    if (b.label == label) return b;
  }
  throw std::out_of_range("layout has no block " + std::string(to_string(label)));
}

Eigen::VectorXd LatentLayout::read(const Eigen::VectorXd& field, BlockLabel label) const {
  const auto& b = block(label);
  return field.segment(b.offset, b.length);
}

void LatentLayout::write(Eigen::VectorXd& field, BlockLabel label, const Eigen::VectorXd& values) const {
  const auto& b = block(label);
  if (values.size() != b.length) throw std::invalid_argument("LatentLayout::write: length mismatch");
  field.segment(b.offset, b.length) = values;
}

std::vector<PrecisionLabel> LatentLayout::precisions() const {
  std::vector<PrecisionLabel> out;
  for (const auto& b : blocks_) {
    if (b.precision && std::find(out.begin(), out.end(), *b.precision) == out.end()) {
      out.push_back(*b.precision);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

HyperParams default_hyper(const LatentLayout& layout) {
  HyperParams h;
  for (auto p : layout.precisions()) h.tau[p] = 1.0;
  if (layout.config().model == ModelId::Model3) {
    h.rho.assign(static_cast<std::size_t>(layout.config().num_rho), 1.0);
  }
  return h;
}

double hyper_value(const HyperParams& hyper, const HyperId& id) {
  switch (id.kind) {
    case HyperKind::Precision: return hyper.precision(id.precision);
    case HyperKind::Delta: return hyper.delta;
    case HyperKind::Varsigma: return hyper.varsigma;
    case HyperKind::Rho: return hyper.rho.at(static_cast<std::size_t>(id.rho_index));
  }
  return 0.0;
}

void set_hyper_value(HyperParams& hyper, const HyperId& id, double value) {
  switch (id.kind) {
    case HyperKind::Precision: hyper.tau[id.precision] = value; break;
    case HyperKind::Delta: hyper.delta = value; break;
    case HyperKind::Varsigma: hyper.varsigma = value; break;
    case HyperKind::Rho:
      if (hyper.rho.size() <= static_cast<std::size_t>(id.rho_index)) {
        hyper.rho.resize(static_cast<std::size_t>(id.rho_index) + 1, 1.0);
      }
      hyper.rho[static_cast<std::size_t>(id.rho_index)] = value;
      break;
  }
}

Eigen::VectorXd to_log_vector(const LatentLayout& layout, const HyperParams& hyper) {
  const auto& ids = layout.hypers();
  Eigen::VectorXd out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = std::log(hyper_value(hyper, ids[k]));
  }
  return out;
}

HyperParams from_log_vector(const LatentLayout& layout, const Eigen::VectorXd& log_values) {
  const auto& ids = layout.hypers();
  if (log_values.size() != static_cast<Eigen::Index>(ids.size())) {
    throw std::invalid_argument("from_log_vector: size mismatch");
  }
  HyperParams h = default_hyper(layout);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    set_hyper_value(h, ids[k], std::exp(log_values(static_cast<Eigen::Index>(k))));
  }
  return h;
}

namespace {

// Calls emit(index, coefficient) for every latent entry loading on cell (i, t, d).
template <typename Emit>
void for_each_term(const LatentLayout& layout, const HyperParams& hyper, int i, int t, Disease d,
                   Emit&& emit) {
  const int A = layout.num_areas();
  const bool inc = d == Disease::Incidence;
  const ModelId model = layout.config().model;
  const double delta = hyper.delta;

  emit(layout.block(inc ? BlockLabel::AlphaI : BlockLabel::AlphaM).offset, 1.0);
  emit(layout.block(BlockLabel::Kappa).offset + i, inc ? delta : 1.0 / delta);
  if (!inc) emit(layout.block(BlockLabel::U).offset + i, 1.0);

  switch (model) {
    case ModelId::Model1:
    case ModelId::AdditiveBaseline: {
      emit(layout.block(inc ? BlockLabel::GammaI : BlockLabel::GammaM).offset + t, 1.0);
      const BlockLabel chi = inc ? BlockLabel::ChiI : BlockLabel::ChiM;
      if (layout.has(chi)) emit(layout.block(chi).offset + t * A + i, 1.0);
      break;
    }
    case ModelId::Model2: {
      const double s = hyper.varsigma;
      emit(layout.block(BlockLabel::GammaShared).offset + t, inc ? s : 1.0 / s);
      const BlockLabel chi = inc ? BlockLabel::ChiI : BlockLabel::ChiM;
      if (layout.has(chi)) emit(layout.block(chi).offset + t * A + i, 1.0);
      break;
    }
    case ModelId::Model3: {
      const double r = hyper.rho_at(t);
      if (!inc) emit(layout.block(BlockLabel::GammaM).offset + t, 1.0);
      emit(layout.block(BlockLabel::ChiShared).offset + t * A + i, inc ? r : 1.0 / r);
      break;
    }
  }
}

}  // namespace

double linear_predictor(const LatentLayout& layout, const LatentState& state, int area, int year,
                        Disease d) {
  double eta = 0.0;
  for_each_term(layout, state.hyper, area, year, d,
                [&](int idx, double coef) { eta += coef * state.field(idx); });
  return eta;
}

Eigen::VectorXd linear_predictors(const LatentLayout& layout, const Eigen::VectorXd& field,
                                  const HyperParams& hyper) {
  const int A = layout.num_areas();
  const int T = layout.num_years();
  Eigen::VectorXd eta(kNumDiseases * A * T);
  for (int d = 0; d < kNumDiseases; ++d) {
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < A; ++i) {
        double acc = 0.0;
        for_each_term(layout, hyper, i, t, static_cast<Disease>(d),
                      [&](int idx, double coef) { acc += coef * field(idx); });
        eta((d * T + t) * A + i) = acc;
      }
    }
  }
  return eta;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> design_matrix(const LatentLayout& layout,
                                                           const HyperParams& hyper) {
  const int A = layout.num_areas();
  const int T = layout.num_years();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(kNumDiseases * A * T * 5));
  for (int d = 0; d < kNumDiseases; ++d) {
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < A; ++i) {
        const int row = (d * T + t) * A + i;
        for_each_term(layout, hyper, i, t, static_cast<Disease>(d),
                      [&](int idx, double coef) { triplets.emplace_back(row, idx, coef); });
      }
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> j(kNumDiseases * A * T, layout.size());
  j.setFromTriplets(triplets.begin(), triplets.end());
  return j;
}

SparseMatrix joint_prior_precision(const LatentLayout& layout, const HyperParams& hyper) {
  std::vector<Triplet> triplets;
  for (const auto& b : layout.blocks()) {
    if (!b.structure) {
      for (int k = 0; k < b.length; ++k) triplets.emplace_back(b.offset + k, b.offset + k, kInterceptRidge);
      continue;
    }
    const double tau = hyper.precision(*b.precision);
    const SparseMatrix& r = b.structure->entries;
    for (Eigen::Index k = 0; k < r.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(r, k); it; ++it) {
        triplets.emplace_back(b.offset + static_cast<int>(it.row()), b.offset + static_cast<int>(it.col()),
                              tau * it.value());
      }
    }
  }
  SparseMatrix q(layout.size(), layout.size());
  q.setFromTriplets(triplets.begin(), triplets.end());
  return q;
}

double field_log_prior(const LatentLayout& layout, const Eigen::VectorXd& field,
                       const HyperParams& hyper) {
  double lp = 0.0;
  for (const auto& b : layout.blocks()) {
    if (!b.structure) continue;
    const double tau = hyper.precision(*b.precision);
    const Eigen::VectorXd x = field.segment(b.offset, b.length);
    const double quad = x.dot(b.structure->entries * x);
    const double effective_dim = b.length - b.num_constraints();
    lp += 0.5 * effective_dim * std::log(tau) - 0.5 * tau * quad;
  }
  return lp;
}

double hyper_log_prior(const LatentLayout& layout, const HyperParams& hyper) {
  const ModelConfig& cfg = layout.config();
  double lp = 0.0;
  for (const auto& id : layout.hypers()) {
    const double v = hyper_value(hyper, id);
    if (id.kind == HyperKind::Precision) {
      lp += uniform_sd_log_pdf(v, cfg.sd_prior_upper);
    } else {
      lp += gamma_log_pdf(v, cfg.gamma_shape, cfg.gamma_rate);
    }
  }
  return lp;
}

double log_prior(const LatentLayout& layout, const LatentState& state) {
  return field_log_prior(layout, state.field, state.hyper) + hyper_log_prior(layout, state.hyper);
}

}  // namespace scm
