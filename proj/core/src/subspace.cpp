#include "qsec/subspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace qsec {

namespace {

std::atomic<double> g_rel_tol{-1.0};

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Headroom over the bare LAPACK-style cutoff; rank decisions downstream of
// several chained SVDs sit well above eps but far below any true singular
// value at the scales this library targets.
constexpr double kSafety = 256.0;

std::string shape_str(const LinMap& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool orthonormal_columns(const LinMap& m) {
  if (m.cols() == 0) return true;
  return (m.transpose() * m - LinMap::Identity(m.cols(), m.cols()))
             .cwiseAbs()
             .maxCoeff() < 1e-10;
}

// BDCSVD's deflation can return corrupt factors on structured inputs
// (observed on block matrices with repeated identity blocks, Eigen 3.4).
// Every decomposition is verified and recomputed with JacobiSVD on failure.
struct Svd {
  Eigen::VectorXd sigma;
  LinMap u, v;  // empty unless requested
};

Svd checked_svd(const LinMap& m, unsigned options) {
  Eigen::BDCSVD<LinMap> fast(m, options);
  Svd out{fast.singularValues(),
          (options & Eigen::ComputeThinU) ? LinMap(fast.matrixU()) : LinMap(),
          (options & (Eigen::ComputeThinV | Eigen::ComputeFullV))
              ? LinMap(fast.matrixV())
              : LinMap()};
  if (orthonormal_columns(out.u) && orthonormal_columns(out.v)) return out;
  Eigen::JacobiSVD<LinMap> exact(m, options);
  return Svd{exact.singularValues(),
             (options & Eigen::ComputeThinU) ? LinMap(exact.matrixU()) : LinMap(),
             (options & (Eigen::ComputeThinV | Eigen::ComputeFullV))
                 ? LinMap(exact.matrixV())
                 : LinMap()};
}

}  // namespace

double global_rel_tol() { return g_rel_tol.load(); }

void set_global_rel_tol(double tol) { g_rel_tol.store(tol); }

double rank_rel_tol(Eigen::Index rows, Eigen::Index cols, double override_tol) {
  if (override_tol > 0) return override_tol;
  double global = g_rel_tol.load();
  if (global > 0) return global;
  return kSafety * static_cast<double>(std::max<Eigen::Index>({rows, cols, 1})) * kEps;
}

Subspace Subspace::zero(int ambient_dim, double tol) {
  return Subspace(LinMap::Zero(ambient_dim, 0), rank_rel_tol(ambient_dim, 0, tol));
}

Subspace Subspace::full(int ambient_dim, double tol) {
  return Subspace(LinMap::Identity(ambient_dim, ambient_dim),
                  rank_rel_tol(ambient_dim, ambient_dim, tol));
}

Subspace Subspace::span_of(const LinMap& span, double tol) {
  double rel = rank_rel_tol(span.rows(), span.cols(), tol);
  if (span.cols() == 0 || span.rows() == 0)
    return Subspace(LinMap::Zero(span.rows(), 0), rel);
  Svd svd = checked_svd(span, Eigen::ComputeThinU);
  double cutoff = rel * svd.sigma(0);
  int rank = 0;
  while (rank < svd.sigma.size() && svd.sigma(rank) > cutoff) ++rank;
  return Subspace(svd.u.leftCols(rank), rel);
}

Subspace Subspace::from_orthonormal(LinMap basis, double tol) {
  double rel = rank_rel_tol(basis.rows(), basis.cols(), tol);
  if (basis.cols() > 0) {
    double err = (basis.transpose() * basis -
                  LinMap::Identity(basis.cols(), basis.cols()))
                     .cwiseAbs()
                     .maxCoeff();
    if (err > 10.0 * std::max(rel, kSafety * kEps))
      throw std::invalid_argument("basis is not orthonormal (deviation " +
                                  std::to_string(err) + ")");
  }
  return Subspace(std::move(basis), rel);
}

double Subspace::residual(const Eigen::VectorXd& v) const {
  if (v.size() != ambient_dim())
    throw DimensionMismatch("vector of size " + std::to_string(v.size()) +
                            " against ambient " + std::to_string(ambient_dim()));
  return (v - basis_ * (basis_.transpose() * v)).norm();
}

bool Subspace::contains(const Eigen::VectorXd& v, double tol) const {
  double rel = rank_rel_tol(ambient_dim(), dim(), tol);
  return residual(v) <= 10.0 * rel * std::max(1.0, v.norm());
}

Subspace kernel(const LinMap& m, double tol, double scale_floor) {
  double rel = rank_rel_tol(m.rows(), m.cols(), tol);
  if (m.cols() == 0) return Subspace::zero(0, tol);
  if (m.rows() == 0) return Subspace::full(static_cast<int>(m.cols()), tol);
  Svd svd = checked_svd(m, Eigen::ComputeFullV);
  double smax = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
  double reference = std::max(smax, scale_floor);
  if (reference <= 0) return Subspace::full(static_cast<int>(m.cols()), tol);
  double cutoff = rel * reference;
  int rank = 0;
  while (rank < svd.sigma.size() && svd.sigma(rank) > cutoff) ++rank;
  return Subspace::from_orthonormal(svd.v.rightCols(m.cols() - rank), rel);
}

Subspace image(const LinMap& m, double tol) { return Subspace::span_of(m, tol); }

Subspace complement(const Subspace& a, double tol) {
  int n = a.ambient_dim();
  if (a.is_zero()) return Subspace::full(n, tol);
  // Kernel of basis^T: vectors orthogonal to every basis column.
  return kernel(LinMap(a.basis().transpose()), tol);
}

Subspace intersect(const Subspace& a, const Subspace& b, double tol) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("intersect: ambient " + std::to_string(a.ambient_dim()) +
                            " vs " + std::to_string(b.ambient_dim()));
  const int n = a.ambient_dim();
  if (a.is_full()) return b;
  if (b.is_full()) return a;
  if (a.is_zero() || b.is_zero()) return Subspace::zero(n, tol);
  LinMap stacked(2 * n, n);
  stacked.topRows(n) = LinMap::Identity(n, n) - a.projector();
  stacked.bottomRows(n) = LinMap::Identity(n, n) - b.projector();
  return kernel(stacked, tol);
}

Subspace equalise(const Subspace& domain, const std::vector<LinMap>& maps,
                  double tol) {
  if (maps.size() <= 1) return domain;
  const Eigen::Index rows = maps.front().rows();
  for (const LinMap& f : maps) {
    if (f.cols() != domain.ambient_dim())
      throw ShapeMismatch("equalise: map domain " + shape_str(f) +
                          " vs ambient " + std::to_string(domain.ambient_dim()));
    if (f.rows() != rows)
      throw ShapeMismatch("equalise: maps have differing target dimensions");
  }
  const Eigen::Index k = static_cast<Eigen::Index>(maps.size()) - 1;
  LinMap diffs(k * rows, domain.dim());
  double scale = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    diffs.middleRows(i * rows, rows) = (maps[i] - maps[i + 1]) * domain.basis();
  for (const LinMap& f : maps) scale = std::max(scale, f.norm());
  Subspace in_coords = kernel(diffs, tol, scale);
  return Subspace::from_orthonormal(domain.basis() * in_coords.basis(),
                                    in_coords.tol());
}

Subspace preimage(const LinMap& m, const Subspace& w, double tol) {
  if (m.rows() != w.ambient_dim())
    throw ShapeMismatch("preimage: map target " + shape_str(m) + " vs ambient " +
                        std::to_string(w.ambient_dim()));
  if (w.is_full()) return Subspace::full(static_cast<int>(m.cols()), tol);
  LinMap residual_map = m - w.basis() * (w.basis().transpose() * m);
  return kernel(residual_map, tol, m.norm());
}

LinMap compose_path(const std::vector<LinMap>& edge_maps, const QuiverPath& path,
                    int source_dim) {
  LinMap acc = LinMap::Identity(source_dim, source_dim);
  for (EdgeId e : path.edges) {
    const LinMap& step = edge_maps.at(e);
    if (step.cols() != acc.rows())
      throw ShapeMismatch("compose_path: edge " + std::to_string(e) + " expects " +
                          std::to_string(step.cols()) + " columns, got " +
                          std::to_string(acc.rows()));
    acc = step * acc;
  }
  return acc;
}

LinMap restrict_map(const LinMap& m, const Subspace& dom, const Subspace& codom,
                    double tol) {
  if (m.cols() != dom.ambient_dim() || m.rows() != codom.ambient_dim())
    throw ShapeMismatch("restrict_map: " + shape_str(m) + " against ambients " +
                        std::to_string(dom.ambient_dim()) + " -> " +
                        std::to_string(codom.ambient_dim()));
  LinMap mapped = m * dom.basis();
  LinMap leak = mapped - codom.basis() * (codom.basis().transpose() * mapped);
  double rel = rank_rel_tol(m.rows(), m.cols(), tol);
  double bound = 10.0 * rel * std::max(1.0, m.norm());
  if (mapped.cols() > 0 && leak.norm() > bound)
    throw NotInvariant("restrict_map: image leaks out of the codomain by " +
                       std::to_string(leak.norm()) + " (allowed " +
                       std::to_string(bound) + ")");
  // Coordinates below the roundoff scale of m are cancellation residue;
  // snap them so exact zeros survive into later stages.
  LinMap coords = codom.basis().transpose() * mapped;
  double cut = 64.0 * kEps * m.norm();
  return coords.unaryExpr([cut](double x) { return std::abs(x) <= cut ? 0.0 : x; });
}

LinMap clean_product(const LinMap& a, const LinMap& b) {
  LinMap p = a * b;
  double anchor = a.norm() * b.norm();
  if (anchor > 0) {
    double cut = 64.0 * kEps * anchor;
    p = p.unaryExpr([cut](double x) { return std::abs(x) <= cut ? 0.0 : x; });
  }
  return p;
}

LinMap pinv(const LinMap& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return LinMap::Zero(m.cols(), m.rows());
  Svd svd = checked_svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double rel = rank_rel_tol(m.rows(), m.cols(), tol);
  double cutoff = rel * svd.sigma(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(svd.sigma.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (svd.sigma(i) > cutoff) inv(i) = 1.0 / svd.sigma(i);
  return svd.v * inv.asDiagonal() * svd.u.transpose();
}

double principal_angle_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("principal_angle_distance: ambient " +
                            std::to_string(a.ambient_dim()) + " vs " +
                            std::to_string(b.ambient_dim()));
  if (a.dim() != b.dim()) return std::numeric_limits<double>::infinity();
  if (a.dim() == 0) return 0.0;
  // sin of the largest angle == largest singular value of (I - P_b) A.
  LinMap rest = a.basis() - b.basis() * (b.basis().transpose() * a.basis());
  Eigen::BDCSVD<LinMap> svd(rest);
  return std::min(1.0, svd.singularValues()(0));
}

}  // namespace qsec
