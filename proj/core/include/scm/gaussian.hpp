#pragma once

#include "scm/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <random>

namespace scm {

using Rng = std::mt19937_64;

/// Thrown when a factorization, linear constraint system or Newton iteration
/// cannot produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N(mean, Q^{-1}) conditioned on C x = 0.
///
/// Q is factored once with a fill-reducing ordering; the factor is reused for
/// every solve, sample and correction. Constraints are imposed by conditioning
/// by kriging: x* = x - Q^{-1} C' (C Q^{-1} C')^{-1} C x.
class ConstrainedGaussian {
 public:
  /// `constraints` may have zero rows. Throws NumericalError if Q is not
  /// positive definite or C Q^{-1} C' is singular (including zero rows).
  ConstrainedGaussian(const Eigen::VectorXd& mean, const SparseMatrix& precision,
                      const SparseMatrix& constraints);

  int dim() const { return static_cast<int>(mean_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.rows()); }

  /// Conditional mean; satisfies the constraints.
  const Eigen::VectorXd& mean() const { return mean_; }
  const SparseMatrix& precision() const { return precision_; }
  const SparseMatrix& constraints() const { return constraints_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Kriging correction of an arbitrary vector onto {C x = 0}.
  Eigen::VectorXd correct(const Eigen::VectorXd& x) const;

  Eigen::VectorXd sample(Rng& rng) const;

  /// Constrained draw around a given point: mean + rho (x - mean) + sqrt(1 - rho^2) e,
  /// with e a zero-mean constrained draw. rho = 0 gives an independent draw.
  Eigen::VectorXd sample_around(const Eigen::VectorXd& x, double rho, Rng& rng) const;

  /// -1/2 (x - mean)' Q (x - mean), without normalising constant.
  double log_kernel(const Eigen::VectorXd& x) const;

  /// log det of Q restricted to the constraint subspace:
  /// log|Q| + log|C Q^{-1} C'| - log|C C'|.
  double log_det_restricted() const;

  double max_constraint_violation(const Eigen::VectorXd& x) const;

 private:
  using Factor = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

  Eigen::VectorXd mean_;
  SparseMatrix precision_;
  SparseMatrix constraints_;
  std::shared_ptr<Factor> factor_;
  Eigen::MatrixXd q_inv_ct_;                // Q^{-1} C'
  Eigen::LDLT<Eigen::MatrixXd> schur_;      // C Q^{-1} C'
  double log_det_q_ = 0.0;
  double log_det_schur_ = 0.0;
  double log_det_cct_ = 0.0;
};

/// One draw from N(mode, precision^{-1}) conditioned on constraints * x = 0.
Eigen::VectorXd sample_constrained_gaussian(const Eigen::VectorXd& mode, const SparseMatrix& precision,
                                            const SparseMatrix& constraints, Rng& rng);

Eigen::VectorXd sample_constrained_gaussian(const Eigen::VectorXd& mode, const SparseMatrix& precision,
                                            const ConstraintSet& constraints, Rng& rng);

}  // namespace scm
