#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <vector>

namespace scm::testing {

inline Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& m) {
  return Eigen::MatrixXd(m);
}

inline int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  int rank = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > rel_tol * scale) ++rank;
  }
  return rank;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

inline int matrix_rank(const Eigen::MatrixXd& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

/// Orthonormal basis of the null space of C (columns).
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& c, int n) {
  if (c.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const int r = matrix_rank(c);
  return svd.matrixV().rightCols(n - r);
}

/// Covariance of N(m, Q^{-1}) conditioned on C x = 0, computed through the null-space basis.
inline Eigen::MatrixXd constrained_covariance(const Eigen::MatrixXd& q, const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd v = null_space(c, static_cast<int>(q.rows()));
  const Eigen::MatrixXd inner = v.transpose() * q * v;
  return v * inner.inverse() * v.transpose();
}

inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws) {
  const Eigen::RowVectorXd mu = draws.colwise().mean();
  const Eigen::MatrixXd centred = draws.rowwise() - mu;
  return centred.transpose() * centred / static_cast<double>(draws.rows() - 1);
}

}  // namespace scm::testing
