#include "scm/gaussian.hpp"

#include <cmath>

namespace scm {

namespace {

double ldlt_log_det(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ldlt.vectorD().size(); ++k) acc += std::log(ldlt.vectorD()(k));
  return acc;
}

bool ldlt_is_positive_definite(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  if (d.size() == 0) return true;
  const double largest = d.cwiseAbs().maxCoeff();
  return largest > 0.0 && d.minCoeff() > 1e-12 * largest;
}

}  // namespace

ConstrainedGaussian::ConstrainedGaussian(const Eigen::VectorXd& mean, const SparseMatrix& precision,
                                         const SparseMatrix& constraints)
    : precision_(precision), constraints_(constraints), factor_(std::make_shared<Factor>()) {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw std::invalid_argument("ConstrainedGaussian: precision/mean size mismatch");
  }
  if (constraints.rows() > 0 && constraints.cols() != mean.size()) {
    throw std::invalid_argument("ConstrainedGaussian: constraint width mismatch");
  }
  factor_->compute(precision_);
  if (factor_->info() != Eigen::Success) {
    throw NumericalError("ConstrainedGaussian: precision is not positive definite");
  }
  const auto& l = factor_->matrixL().nestedExpression();
  for (Eigen::Index k = 0; k < l.outerSize(); ++k) log_det_q_ += 2.0 * std::log(l.coeff(k, k));

  if (constraints_.rows() > 0) {
    const Eigen::MatrixXd ct = Eigen::MatrixXd(constraints_.transpose());
    q_inv_ct_ = factor_->solve(ct);
    const Eigen::MatrixXd schur = constraints_ * q_inv_ct_;
    schur_.compute(0.5 * (schur + schur.transpose()));
    if (!ldlt_is_positive_definite(schur_)) {
      throw NumericalError("ConstrainedGaussian: constraint rows are linearly dependent");
    }
    log_det_schur_ = ldlt_log_det(schur_);
    const Eigen::MatrixXd cct = constraints_ * ct;
    log_det_cct_ = ldlt_log_det(Eigen::LDLT<Eigen::MatrixXd>(cct));
  }
  mean_ = correct(mean);
}

Eigen::VectorXd ConstrainedGaussian::solve(const Eigen::VectorXd& rhs) const {
  return factor_->solve(rhs);
}

Eigen::VectorXd ConstrainedGaussian::correct(const Eigen::VectorXd& x) const {
  if (constraints_.rows() == 0) return x;
  Eigen::VectorXd out = x;
  // A second pass mops up round-off from nearly singular directions of Q.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd residual = constraints_ * out;
    if (pass > 0 && residual.cwiseAbs().maxCoeff() < 1e-13) break;
    out -= q_inv_ct_ * schur_.solve(residual);
  }
  return out;
}

Eigen::VectorXd ConstrainedGaussian::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(dim());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  const Eigen::VectorXd y = factor_->matrixU().solve(z);
  const Eigen::VectorXd x = factor_->permutationPinv() * y;
  return correct(mean_ + x);
}

Eigen::VectorXd ConstrainedGaussian::sample_around(const Eigen::VectorXd& x, double rho, Rng& rng) const {
  if (rho == 0.0) return sample(rng);
  const Eigen::VectorXd noise = sample(rng) - mean_;
  return correct(mean_ + rho * (x - mean_) + std::sqrt(1.0 - rho * rho) * noise);
}

double ConstrainedGaussian::log_kernel(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd diff = x - mean_;
  return -0.5 * diff.dot(precision_ * diff);
}

double ConstrainedGaussian::log_det_restricted() const {
  return log_det_q_ + log_det_schur_ - log_det_cct_;
}

double ConstrainedGaussian::max_constraint_violation(const Eigen::VectorXd& x) const {
  if (constraints_.rows() == 0) return 0.0;
  return (constraints_ * x).cwiseAbs().maxCoeff();
}

Eigen::VectorXd sample_constrained_gaussian(const Eigen::VectorXd& mode, const SparseMatrix& precision,
                                            const SparseMatrix& constraints, Rng& rng) {
  return ConstrainedGaussian(mode, precision, constraints).sample(rng);
}

Eigen::VectorXd sample_constrained_gaussian(const Eigen::VectorXd& mode, const SparseMatrix& precision,
                                            const ConstraintSet& constraints, Rng& rng) {
  return sample_constrained_gaussian(mode, precision, SparseMatrix(constraints.matrix.sparseView()), rng);
}

}  // namespace scm
