#include "qsec/learn.hpp"

#include <ostream>
#include <string>

namespace qsec {

VertexData VertexData::slice(const Dataset& d, const std::vector<int>& dims) {
  int total = 0;
  for (int k : dims) total += k;
  if (total != d.width())
    throw WidthMismatch("dataset width " + std::to_string(d.width()) +
                        " does not match total dimension " + std::to_string(total));
  VertexData vd;
  int at = 0;
  for (int k : dims) {
    vd.blocks.push_back(d.samples.middleCols(at, k));
    at += k;
  }
  return vd;
}

EdgeFit fit_edge_maps(const Quiver& q, const VertexData& vd) {
  if (static_cast<int>(vd.blocks.size()) != q.num_vertices())
    throw WidthMismatch("vertex data has " + std::to_string(vd.blocks.size()) +
                        " blocks for " + std::to_string(q.num_vertices()) +
                        " vertices");
  const int m = vd.samples();
  for (const auto& block : vd.blocks)
    if (block.rows() != m)
      throw WidthMismatch("vertex blocks disagree on the sample count");

  EdgeFit out;
  for (const auto& block : vd.blocks)
    out.rep.dims.push_back(static_cast<int>(block.cols()));
  out.residuals.resize(q.num_edges());
  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    const Eigen::MatrixXd& yu = vd.blocks[q.source(e)];
    const Eigen::MatrixXd& yv = vd.blocks[q.target(e)];
    Eigen::MatrixXd estimate_t = pinv(yu) * yv;  // dim(u) x dim(v)
    out.residuals(e) = (yv - yu * estimate_t).norm();
    out.rep.maps.push_back(estimate_t.transpose());
  }
  return out;
}

BlowupGraph delta_blowup(const Quiver& q, const std::vector<int>& delta,
                         const Representation* weights) {
  if (static_cast<int>(delta.size()) != q.num_vertices())
    throw ShapeMismatch("delta has " + std::to_string(delta.size()) +
                        " entries for " + std::to_string(q.num_vertices()) +
                        " vertices");
  for (int k : delta)
    if (k < 0) throw ShapeMismatch("delta must be non-negative");
  if (weights) {
    weights->validate(q);
    if (weights->dims != delta)
      throw ShapeMismatch("weight dimensions do not match delta");
  }

  BlowupGraph g;
  g.weighted = weights != nullptr;
  g.node_offset.reserve(q.num_vertices());
  for (VertexId v = 0; v < q.num_vertices(); ++v) {
    g.node_offset.push_back(g.num_nodes);
    g.num_nodes += delta[v];
  }
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    if (q.in_degree(v) > 1) g.single_parent = false;

  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    const VertexId s = q.source(e), t = q.target(e);
    for (int i = 0; i < delta[s]; ++i)
      for (int j = 0; j < delta[t]; ++j)
        g.arcs.push_back(BlowupGraph::Arc{
            g.node_offset[s] + i, g.node_offset[t] + j,
            weights ? weights->maps[e](j, i) : 1.0, e});
  }
  return g;
}

void BlowupGraph::write_edge_list(std::ostream& os) const {
  for (const Arc& a : arcs) os << a.src << ' ' << a.dst << ' ' << a.weight << '\n';
}

LearnPcaResult learn_then_pca(const Quiver& q, const std::vector<int>& dims,
                              Dataset data, int r, double tol) {
  if (!data.centred) data.centre();
  LearnPcaResult out;
  out.fit = fit_edge_maps(q, VertexData::slice(data, dims));
  out.sections = sections(q, out.fit.rep, tol);
  out.pcs = quiver_pca(data, out.sections.space, r);
  return out;
}

}  // namespace qsec
