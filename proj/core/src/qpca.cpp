#include "qsec/qpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qsec {

namespace {

constexpr double kFeasTol = 1e-8;

// Ties are flagged on the gap between consecutive eigenvalues relative to
// the spectral scale.
std::vector<bool> tie_flags(const Eigen::VectorXd& values) {
  std::vector<bool> flags(values.size(), false);
  if (values.size() == 0) return flags;
  double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < values.size(); ++i)
    flags[i] = std::abs(values(i) - values(i + 1)) <= 1e-10 * scale;
  return flags;
}

// Sign convention: first coordinate of visible magnitude is positive.
void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double scale = m.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > 1e-12 * std::max(1.0, scale)) {
        if (m(r, c) < 0) m.col(c) = -m.col(c);
        break;
      }
    }
  }
}

void check_symmetric(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols())
    throw ShapeMismatch(std::string(name) + " is not square");
  if (m.size() == 0) return;
  double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (dev > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw ShapeMismatch(std::string(name) + " is not symmetric (deviation " +
                        std::to_string(dev) + ")");
}

}  // namespace

void Dataset::centre() {
  if (size() > 0) {
    Eigen::RowVectorXd mean = samples.colwise().mean();
    samples.rowwise() -= mean;
  }
  centred = true;
}

void Dataset::assert_centred() {
  if (size() > 0 && width() > 0) {
    Eigen::RowVectorXd mean = samples.colwise().mean();
    Eigen::RowVectorXd scale =
        samples.cwiseAbs().colwise().maxCoeff().cwiseMax(1.0);
    for (int c = 0; c < width(); ++c)
      if (std::abs(mean(c)) > 1e-12 * scale(c))
        throw NotCentred("column " + std::to_string(c) + " has mean " +
                         std::to_string(mean(c)));
  }
  centred = true;
}

Covariance covariance(const Dataset& d) {
  if (!d.centred)
    throw NotCentred("covariance requires a centred dataset; call centre() or assert_centred()");
  if (d.size() == 0) throw std::invalid_argument("covariance of an empty dataset");
  Eigen::MatrixXd s =
      d.samples.transpose() * d.samples / static_cast<double>(d.size());
  return Covariance{0.5 * (s + s.transpose())};
}

EigenPairs ordinary_pca(const Covariance& s, int r) {
  check_symmetric(s.s, "covariance");
  const int n = static_cast<int>(s.s.rows());
  if (r < 0 || r > n)
    throw std::invalid_argument("component count " + std::to_string(r) +
                                " out of range for dimension " + std::to_string(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.s);
  EigenPairs out;
  out.eigenvalues = eig.eigenvalues().reverse().head(r);
  out.directions = eig.eigenvectors().rowwise().reverse().leftCols(r);
  fix_column_signs(out.directions);
  // Flag against the full spectrum so the r-th value also reports a tie with
  // the first dropped one.
  Eigen::VectorXd all = eig.eigenvalues().reverse();
  std::vector<bool> flags = tie_flags(all);
  out.tie_with_next.assign(flags.begin(), flags.begin() + r);
  return out;
}

PencilResult solve_pencil(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_symmetric(a, "pencil left-hand matrix");
  check_symmetric(b, "pencil right-hand matrix");
  if (a.rows() != b.rows())
    throw ShapeMismatch("pencil matrices differ in size");
  const int d = static_cast<int>(a.rows());

  PencilResult out;
  if (d == 0) {
    out.eigenvalues.resize(0);
    out.eigenvectors.resize(0, 0);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spec_b(b);
  double bmin = spec_b.eigenvalues()(0);
  double bmax = spec_b.eigenvalues()(d - 1);
  out.b_condition = bmin > 0 ? bmax / bmin : std::numeric_limits<double>::infinity();
  if (bmin <= 1e-12 * std::max(bmax, 1.0))
    throw NotPositiveDefinite(
        "pencil right-hand matrix is not positive definite (condition estimate " +
            std::to_string(out.b_condition) + ")",
        out.b_condition);

  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("Cholesky factorization of the right-hand matrix failed",
                              out.b_condition);

  // Whiten: solve L W L^T = A, then an ordinary symmetric eigenproblem.
  Eigen::MatrixXd half = llt.matrixL().solve(a);
  Eigen::MatrixXd white = llt.matrixL().solve(half.transpose()).transpose();
  white = 0.5 * (white + white.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(white);

  out.eigenvalues = eig.eigenvalues().reverse();
  Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();
  out.eigenvectors = llt.matrixU().solve(w);  // back-substitute, stays b-orthonormal
  fix_column_signs(out.eigenvectors);
  out.tie_with_next = tie_flags(out.eigenvalues);
  return out;
}

QuiverPCs quiver_pca(const Dataset& d, const SectionSpace& sec, int r) {
  if (sec.section_dim == 0)
    throw ZeroSections("the space of sections is trivial; no constrained components exist");
  if (d.width() != sec.total_dim)
    throw WidthMismatch("data width " + std::to_string(d.width()) +
                        " does not match total dimension " +
                        std::to_string(sec.total_dim));
  if (r < 1 || r > sec.section_dim)
    throw std::invalid_argument("component count " + std::to_string(r) +
                                " out of range 1.." + std::to_string(sec.section_dim));

  Covariance s = covariance(d);
  const LinMap& f = sec.embedding;
  Eigen::MatrixXd a = f.transpose() * s.s * f;
  a = 0.5 * (a + a.transpose());
  Eigen::MatrixXd b = f.transpose() * f;
  b = 0.5 * (b + b.transpose());
  PencilResult pencil = solve_pencil(a, b);

  QuiverPCs out;
  out.section_dim = sec.section_dim;
  out.coefficients = pencil.eigenvectors.leftCols(r);
  out.directions = f * out.coefficients;
  for (int c = 0; c < r; ++c) {
    double norm = out.directions.col(c).norm();
    if (norm > 0) out.directions.col(c) /= norm;
  }
  fix_column_signs(out.directions);
  out.eigenvalues = pencil.eigenvalues.head(r);
  out.tie_with_next.assign(pencil.tie_with_next.begin(),
                           pencil.tie_with_next.begin() + r);
  out.b_condition = pencil.b_condition;
  out.achieved_trace =
      (out.directions.transpose() * s.s * out.directions).trace();
  return out;
}

double objective_implicit(const Eigen::MatrixXd& x, const Covariance& s,
                          const SectionSpace& sec) {
  if (x.cols() == 0) return 0.0;
  if (x.rows() != sec.total_dim)
    throw WidthMismatch("frame height does not match the total dimension");
  Eigen::MatrixXd gram = x.transpose() * x;
  double ortho = (gram - Eigen::MatrixXd::Identity(x.cols(), x.cols()))
                     .cwiseAbs()
                     .maxCoeff();
  if (ortho > kFeasTol)
    throw Infeasible("columns are not orthonormal (deviation " +
                         std::to_string(ortho) + ")",
                     "X^T X = id");
  Subspace gamma = Subspace::span_of(sec.embedding);
  double leak = (x - gamma.basis() * (gamma.basis().transpose() * x)).norm();
  if (leak > kFeasTol * std::max(1.0, x.norm()))
    throw Infeasible("columns leave the space of sections (residual " +
                         std::to_string(leak) + ")",
                     "columns in the section space");
  return (x.transpose() * s.s * x).trace();
}

double objective_param(const Eigen::MatrixXd& y, const LinMap& f,
                       const Covariance& s) {
  if (y.cols() == 0) return 0.0;
  if (y.rows() != f.cols())
    throw WidthMismatch("coefficient frame height does not match the embedding");
  Eigen::MatrixXd gram = y.transpose() * (f.transpose() * f) * y;
  double dev = (gram - Eigen::MatrixXd::Identity(y.cols(), y.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (dev > kFeasTol)
    throw Infeasible("frame is not F^T F-orthonormal (deviation " +
                         std::to_string(dev) + ")",
                     "Y^T (F^T F) Y = id");
  Eigen::MatrixXd fy = f * y;
  return (fy.transpose() * s.s * fy).trace();
}

double objective_projected(const Eigen::MatrixXd& z, const LinMap& f,
                           const Covariance& s) {
  if (z.cols() == 0) return 0.0;
  if (z.rows() != f.rows())
    throw WidthMismatch("frame height does not match the total dimension");
  Eigen::MatrixXd bz = f * (f.transpose() * z);  // B Z with B = F F^T
  Eigen::MatrixXd gram = bz.transpose() * bz;
  double dev = (gram - Eigen::MatrixXd::Identity(z.cols(), z.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (dev > kFeasTol)
    throw Infeasible("frame is not B^2-orthonormal (deviation " +
                         std::to_string(dev) + ")",
                     "Z^T B^2 Z = id");
  return (bz.transpose() * s.s * bz).trace();
}

double rayleigh(const Eigen::VectorXd& u, const LinMap& f, const Covariance& s) {
  if (u.norm() == 0.0) throw ZeroVector("Rayleigh quotient of the zero vector");
  if (u.size() != f.cols())
    throw WidthMismatch("vector length does not match the embedding width");
  Eigen::VectorXd fu = f * u;
  double denom = fu.squaredNorm();
  if (denom == 0.0) throw ZeroVector("embedding annihilates the vector");
  return fu.dot(s.s * fu) / denom;
}

CovarianceBlocks split_covariance(const Covariance& s, int p) {
  const int n = static_cast<int>(s.s.rows());
  if (p < 0 || p > n) throw ShapeMismatch("block split out of range");
  const int q = n - p;
  return CovarianceBlocks{s.s.topLeftCorner(p, p), s.s.topRightCorner(p, q),
                          s.s.bottomLeftCorner(q, p), s.s.bottomRightCorner(q, q)};
}

OneArrowPencil one_arrow_pencil(const CovarianceBlocks& s, const LinMap& j) {
  const Eigen::Index p = s.uu.rows();
  const Eigen::Index q = s.vv.rows();
  if (s.uu.cols() != p || s.vv.cols() != q || s.uv.rows() != p ||
      s.uv.cols() != q || s.vu.rows() != q || s.vu.cols() != p)
    throw ShapeMismatch("covariance blocks are inconsistent");
  if (j.rows() != q || j.cols() != p)
    throw ShapeMismatch("edge map must be " + std::to_string(q) + "x" +
                        std::to_string(p));
  OneArrowPencil out;
  out.a = s.uu + j.transpose() * s.vu + s.uv * j + j.transpose() * s.vv * j;
  out.b = Eigen::MatrixXd::Identity(p, p) + j.transpose() * j;
  return out;
}

}  // namespace qsec
