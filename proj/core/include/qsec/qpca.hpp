#pragma once

#include <vector>

#include "qsec/sections.hpp"
#include "qsec/subspace.hpp"

namespace qsec {

/// Sample matrix, one row per observation. Columns follow a representation's
/// block layout (vertex order, then coordinate within the vertex).
struct Dataset {
  Eigen::MatrixXd samples;  // m x n
  bool centred = false;

  int size() const { return static_cast<int>(samples.rows()); }
  int width() const { return static_cast<int>(samples.cols()); }

  /// Subtracts column means and marks the dataset centred.
  void centre();
  /// Asserts the data is already centred (column means at noise level);
  /// throws NotCentred otherwise.
  void assert_centred();
};

struct Covariance {
  Eigen::MatrixXd s;  // n x n, symmetric positive semidefinite
};

/// (1/m) sum of y_i y_i^T. Requires a centred dataset.
Covariance covariance(const Dataset& d);

/// Ordinary PCA output: descending eigenvalues with orthonormal directions.
struct EigenPairs {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd directions;  // n x r
  std::vector<bool> tie_with_next;  // [i]: eigenvalue i ties the next one
};

EigenPairs ordinary_pca(const Covariance& s, int r);

/// Full solution of the symmetric-definite pencil a - lambda b, via Cholesky
/// whitening of b. Eigenvectors are b-orthonormal; eigenvalues descend.
struct PencilResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // d x d
  std::vector<bool> tie_with_next;
  double b_condition = 1.0;  // spectral condition estimate of b
};

/// Throws NotPositiveDefinite (with a condition estimate) when b fails the
/// definiteness check.
PencilResult solve_pencil(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Principal components constrained to a section space: directions F u_r for
/// the top generalized eigenvectors of (F^T S F, F^T F).
struct QuiverPCs {
  int section_dim = 0;
  Eigen::MatrixXd directions;    // n x r, orthonormal, inside the section space
  Eigen::VectorXd eigenvalues;   // top r
  Eigen::MatrixXd coefficients;  // d x r, the eigenvectors u_1..u_r
  double achieved_trace = 0.0;
  std::vector<bool> tie_with_next;
  double b_condition = 1.0;
};

/// Throws ZeroSections when the section space is trivial, WidthMismatch when
/// the data width differs from the total dimension, std::invalid_argument
/// when r is out of range.
QuiverPCs quiver_pca(const Dataset& d, const SectionSpace& sec, int r);

/// Objective tr(X^T S X) over n x r frames with orthonormal columns inside
/// the section space. Feasibility is checked at 1e-8 and violations raise
/// Infeasible naming the failed constraint.
double objective_implicit(const Eigen::MatrixXd& x, const Covariance& s,
                          const SectionSpace& sec);

/// Objective tr(Y^T F^T S F Y) over d x r frames with Y^T (F^T F) Y = id.
double objective_param(const Eigen::MatrixXd& y, const LinMap& f,
                       const Covariance& s);

/// Objective tr(Z^T B S B Z) with B = F F^T, over n x r frames with
/// Z^T B^2 Z = id.
double objective_projected(const Eigen::MatrixXd& z, const LinMap& f,
                           const Covariance& s);

/// u^T (F^T S F) u / u^T (F^T F) u. Throws ZeroVector.
double rayleigh(const Eigen::VectorXd& u, const LinMap& f, const Covariance& s);

struct CovarianceBlocks {
  Eigen::MatrixXd uu, uv, vu, vv;
};

/// Splits an (p+q) x (p+q) covariance into blocks for a two-vertex layout.
CovarianceBlocks split_covariance(const Covariance& s, int p);

struct OneArrowPencil {
  Eigen::MatrixXd a, b;
};

/// Closed-form pencil for the single-edge quiver with edge map j:
/// a = S_uu + j^T S_vu + S_uv j + j^T S_vv j and b = id + j^T j.
OneArrowPencil one_arrow_pencil(const CovarianceBlocks& s, const LinMap& j);

}  // namespace qsec
