#pragma once

#include <iosfwd>
#include <vector>

#include "qsec/qpca.hpp"
#include "qsec/sections.hpp"

namespace qsec {

/// Per-vertex sample blocks sliced out of a dataset.
struct VertexData {
  std::vector<Eigen::MatrixXd> blocks;  // one m x dims[v] block per vertex

  static VertexData slice(const Dataset& d, const std::vector<int>& dims);
  int samples() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
};

struct EdgeFit {
  Representation rep;
  Eigen::VectorXd residuals;  // Frobenius residual per edge
};

/// Independent least squares per edge: the transposed map estimate is
/// pinv(Y_source) * Y_target. Rank-deficient sources give the minimum-norm
/// estimator. Throws WidthMismatch on inconsistent blocks.
EdgeFit fit_edge_maps(const Quiver& q, const VertexData& vd);

/// Scalar-node expansion: each vertex becomes delta(v) nodes, each edge a
/// complete bipartite bundle. With weights, bundle arcs carry the matching
/// matrix entries.
struct BlowupGraph {
  int num_nodes = 0;
  std::vector<int> node_offset;  // per quiver vertex
  struct Arc {
    int src = 0;
    int dst = 0;
    double weight = 1.0;
    EdgeId quiver_edge = -1;
  };
  std::vector<Arc> arcs;
  bool weighted = false;
  // False when some vertex has more than one incoming edge, in which case the
  // graphical-model reading of the blowup does not apply.
  bool single_parent = true;

  /// One "src dst weight" line per arc.
  void write_edge_list(std::ostream& os) const;
};

BlowupGraph delta_blowup(const Quiver& q, const std::vector<int>& delta,
                         const Representation* weights = nullptr);

struct LearnPcaResult {
  EdgeFit fit;
  SectionsResult sections;
  QuiverPCs pcs;
};

/// fit_edge_maps, then sections, then quiver_pca on the same (centred) data.
LearnPcaResult learn_then_pca(const Quiver& q, const std::vector<int>& dims,
                              Dataset data, int r, double tol = -1.0);

}  // namespace qsec
