#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qsec/errors.hpp"
#include "qsec/quiver.hpp"

namespace qsec {

/// Dense real linear map, rows x cols. Entries must stay finite.
using LinMap = Eigen::MatrixXd;

/// Relative rank tolerance for a rows x cols problem: singular values at or
/// below tol * sigma_max count as zero. The default follows the usual
/// max(rows, cols) * machine-epsilon convention with a small safety multiple
/// that absorbs roundoff accumulated across chained decompositions. A global
/// override (set by the CLI via --tol or QSEC_TOL) replaces the whole factor.
double rank_rel_tol(Eigen::Index rows, Eigen::Index cols, double override_tol = -1.0);

/// Global override; pass a value <= 0 to restore the default policy.
void set_global_rel_tol(double tol);
double global_rel_tol();

/// A linear subspace of R^ambient, held as an orthonormal column basis built
/// by SVD, together with the relative rank tolerance used to build it.
/// dim() == 0 encodes the zero subspace; an identity basis the full space.
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero(int ambient_dim, double tol = -1.0);
  static Subspace full(int ambient_dim, double tol = -1.0);
  /// Orthonormalizes the column span of `span` at the given tolerance.
  static Subspace span_of(const LinMap& span, double tol = -1.0);
  /// Adopts an orthonormal basis as-is (checked to 10x tolerance).
  static Subspace from_orthonormal(LinMap basis, double tol = -1.0);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const LinMap& basis() const { return basis_; }
  double tol() const { return tol_; }

  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_dim(); }

  /// Orthogonal projector basis * basis^T (ambient x ambient).
  LinMap projector() const { return basis_ * basis_.transpose(); }
  /// ||(I - P) v|| for a single vector.
  double residual(const Eigen::VectorXd& v) const;
  bool contains(const Eigen::VectorXd& v, double tol = -1.0) const;

 private:
  Subspace(LinMap basis, double tol) : basis_(std::move(basis)), tol_(tol) {}
  LinMap basis_;  // ambient x dim, orthonormal columns
  double tol_ = 0.0;
};

/// Numerical null space of m (right singular vectors with sigma <= cutoff).
/// `scale_floor` anchors the cutoff when m itself may be roundoff noise from
/// cancelling terms: singular values are measured against
/// max(sigma_max, scale_floor).
Subspace kernel(const LinMap& m, double tol = -1.0, double scale_floor = 0.0);

/// Numerical column span of m.
Subspace image(const LinMap& m, double tol = -1.0);

/// Orthonormal basis of the orthogonal complement.
Subspace complement(const Subspace& a, double tol = -1.0);

/// Intersection, computed as the kernel of the stacked complement projectors.
/// Throws DimensionMismatch on unequal ambient dimensions.
Subspace intersect(const Subspace& a, const Subspace& b, double tol = -1.0);

/// Largest subspace of `domain` on which all maps agree, via kernels of
/// successive differences restricted to the domain. A single map (or none)
/// returns the domain unchanged. Throws ShapeMismatch.
Subspace equalise(const Subspace& domain, const std::vector<LinMap>& maps,
                  double tol = -1.0);

/// { x : m x in w }, the kernel of (I - P_w) m. Throws ShapeMismatch.
Subspace preimage(const LinMap& m, const Subspace& w, double tol = -1.0);

/// Ordered product of edge maps along a path; the empty path yields the
/// identity on `source_dim`. Throws ShapeMismatch when shapes do not chain.
LinMap compose_path(const std::vector<LinMap>& edge_maps, const QuiverPath& path,
                    int source_dim);

/// a * b with entries below the roundoff scale of the factors snapped to
/// exact zero, so structural zeros survive chained products.
LinMap clean_product(const LinMap& a, const LinMap& b);

/// Coordinate matrix codom^T m dom of the restriction of m to `dom`, provided
/// m maps dom into codom at tolerance; otherwise throws NotInvariant.
LinMap restrict_map(const LinMap& m, const Subspace& dom, const Subspace& codom,
                    double tol = -1.0);

/// Moore-Penrose pseudo-inverse with tolerance-based rank truncation.
LinMap pinv(const LinMap& m, double tol = -1.0);

/// Sine of the largest principal angle when dimensions agree, +infinity
/// otherwise. Throws DimensionMismatch on unequal ambient dimensions.
double principal_angle_distance(const Subspace& a, const Subspace& b);

}  // namespace qsec
