#include "qsec/sections.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <random>
#include <string>

namespace qsec {

int Representation::total_dim() const {
  int n = 0;
  for (int d : dims) n += d;
  return n;
}

std::vector<int> Representation::block_offsets() const {
  std::vector<int> off(dims.size() + 1, 0);
  for (size_t v = 0; v < dims.size(); ++v) off[v + 1] = off[v] + dims[v];
  return off;
}

void Representation::validate(const Quiver& q) const {
  if (static_cast<int>(dims.size()) != q.num_vertices())
    throw ShapeMismatch("representation has " + std::to_string(dims.size()) +
                        " vertex dimensions for " +
                        std::to_string(q.num_vertices()) + " vertices");
  if (static_cast<int>(maps.size()) != q.num_edges())
    throw ShapeMismatch("representation has " + std::to_string(maps.size()) +
                        " maps for " + std::to_string(q.num_edges()) + " edges");
  for (int d : dims)
    if (d < 0) throw ShapeMismatch("negative vertex dimension");
  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    const LinMap& m = maps[e];
    if (m.rows() != dims[q.target(e)] || m.cols() != dims[q.source(e)])
      throw ShapeMismatch("map on edge " + std::to_string(e) + " is " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", expected " + std::to_string(dims[q.target(e)]) + "x" +
                          std::to_string(dims[q.source(e)]));
    if (m.size() > 0 && !m.allFinite())
      throw ShapeMismatch("map on edge " + std::to_string(e) +
                          " has non-finite entries");
  }
}

namespace {

// Vertices of an arborescence in root-first order (parents before children).
std::vector<VertexId> tree_order(const Quiver& host, const Arborescence& t) {
  std::vector<std::vector<VertexId>> children(t.num_vertices);
  for (VertexId v = 0; v < t.num_vertices; ++v)
    if (t.parent_edge[v] >= 0) children[host.source(t.parent_edge[v])].push_back(v);
  std::vector<VertexId> order;
  order.reserve(t.num_vertices);
  std::queue<VertexId> bfs;
  bfs.push(t.root);
  while (!bfs.empty()) {
    VertexId v = bfs.front();
    bfs.pop();
    order.push_back(v);
    for (VertexId c : children[v]) bfs.push(c);
  }
  return order;
}

// Dense quiver over the same vertex set holding only the tree edges.
std::pair<Quiver, std::vector<EdgeId>> materialize_tree(const Quiver& host,
                                                        const Arborescence& t) {
  std::vector<Edge> edges;
  std::vector<EdgeId> to_host;
  for (EdgeId e : t.tree_edges) {
    to_host.push_back(e);
    edges.push_back(host.edge(e));
  }
  return {Quiver(t.num_vertices, std::move(edges)), std::move(to_host)};
}

}  // namespace

SccReduceResult sc_reduce(const Quiver& r, const Representation& rep, double tol) {
  rep.validate(r);
  SccReduceResult res;
  res.ears = ear_decompose(r);
  res.tree = induced_arborescence(r, res.ears);
  const VertexId root = res.ears.root;

  // Path maps from the root through the induced arborescence.
  std::vector<LinMap> path_map(r.num_vertices());
  path_map[root] = LinMap::Identity(rep.dims[root], rep.dims[root]);
  for (VertexId v : tree_order(r, res.tree)) {
    if (v == root) continue;
    EdgeId e = res.tree.parent_edge[v];
    path_map[v] = rep.maps[e] * path_map[r.source(e)];
  }

  // One difference map per terminal edge, stacked; the root space is the
  // common kernel.
  int rows = 0;
  for (EdgeId eps : res.ears.terminal_edges) rows += rep.dims[r.target(eps)];
  if (rows == 0) {
    res.root_space = Subspace::full(rep.dims[root], tol);
  } else {
    LinMap deltas(rows, rep.dims[root]);
    int at = 0;
    double scale = 0.0;
    for (EdgeId eps : res.ears.terminal_edges) {
      int h = rep.dims[r.target(eps)];
      LinMap around = rep.maps[eps] * path_map[r.source(eps)];
      scale = std::max({scale, path_map[r.target(eps)].norm(), around.norm()});
      deltas.middleRows(at, h) = path_map[r.target(eps)] - around;
      at += h;
    }
    res.root_space = kernel(deltas, tol, scale);
  }

  auto [tq, emap] = materialize_tree(r, res.tree);
  res.tree_quiver = std::move(tq);
  res.tree_edge_to_parent = std::move(emap);

  res.reduced.dims = rep.dims;
  res.reduced.dims[root] = res.root_space.dim();
  for (EdgeId e : res.tree_edge_to_parent) {
    const LinMap& m = rep.maps[e];
    res.reduced.maps.push_back(r.source(e) == root ? LinMap(m * res.root_space.basis())
                                                   : m);
  }
  return res;
}

AcyclicReduction acyc_reduce(const Quiver& q, const Representation& rep, double tol) {
  rep.validate(q);
  AcyclicReduction out;

  std::vector<bool> removed(q.num_edges(), false);
  std::vector<int> root_of(q.num_vertices(), -1);  // component index at its root
  for (InducedSubquiver& comp : tarjan_msc(q)) {
    Representation local;
    for (VertexId v : comp.vertex_to_parent) local.dims.push_back(rep.dims[v]);
    for (EdgeId e : comp.edge_to_parent) local.maps.push_back(rep.maps[e]);
    SccReduceResult red = sc_reduce(comp.quiver, local, tol);
    for (EdgeId eps : red.ears.terminal_edges) {
      EdgeId parent = comp.edge_to_parent[eps];
      removed[parent] = true;
      out.removed_edges.push_back(parent);
    }
    SccReduction entry;
    entry.root = comp.vertex_to_parent[red.ears.root];
    entry.ears = std::move(red.ears);
    entry.tree = std::move(red.tree);
    entry.root_space = std::move(red.root_space);
    entry.component = std::move(comp);
    root_of[entry.root] = static_cast<int>(out.components.size());
    out.components.push_back(std::move(entry));
  }
  std::sort(out.removed_edges.begin(), out.removed_edges.end());

  std::vector<Edge> surviving;
  for (EdgeId e = 0; e < q.num_edges(); ++e)
    if (!removed[e]) {
      out.edge_to_parent.push_back(e);
      surviving.push_back(q.edge(e));
    }
  out.quiver = Quiver(q.num_vertices(), std::move(surviving));

  // Constrained subspace at each vertex: start from the reduced root spaces,
  // then sweep once per component against the reversed topological order,
  // pulling the root space back along every surviving path into that root.
  out.lambda.reserve(q.num_vertices());
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    out.lambda.push_back(root_of[v] >= 0 ? out.components[root_of[v]].root_space
                                         : Subspace::full(rep.dims[v], tol));

  const std::vector<VertexId> topo = top_sort(out.quiver);
  for (const SccReduction& comp : out.components) {
    const VertexId rho = comp.root;
    std::vector<bool> reach(q.num_vertices(), false);
    reach[rho] = true;
    std::queue<VertexId> bfs;
    bfs.push(rho);
    while (!bfs.empty()) {
      VertexId v = bfs.front();
      bfs.pop();
      for (EdgeId e : out.quiver.in_edges(v)) {
        VertexId u = out.quiver.source(e);
        if (!reach[u]) {
          reach[u] = true;
          bfs.push(u);
        }
      }
    }
    std::vector<Subspace> constrained(q.num_vertices());
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      VertexId v = *it;
      if (!reach[v]) continue;
      if (v == rho) {
        constrained[v] = comp.root_space;
        continue;
      }
      Subspace acc = Subspace::full(rep.dims[v], tol);
      for (EdgeId e : out.quiver.out_edges(v)) {
        VertexId w = out.quiver.target(e);
        if (!reach[w]) continue;
        acc = intersect(acc, preimage(rep.maps[out.edge_to_parent[e]], constrained[w], tol),
                        tol);
      }
      constrained[v] = std::move(acc);
      out.lambda[v] = intersect(out.lambda[v], constrained[v], tol);
    }
  }

  out.rep.dims.reserve(q.num_vertices());
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    out.rep.dims.push_back(out.lambda[v].dim());
  for (size_t i = 0; i < out.edge_to_parent.size(); ++i) {
    EdgeId parent = out.edge_to_parent[i];
    out.rep.maps.push_back(restrict_map(rep.maps[parent], out.lambda[q.source(parent)],
                                        out.lambda[q.target(parent)], tol));
  }
  return out;
}

Subspace FlowConstraints::flow_space(VertexId v, double tol) const {
  const std::vector<int>& ids = visible.at(v);
  if (ids.empty()) return Subspace::full(root_dim, tol);
  int total = 0;
  double scale = 0.0;
  for (int b : ids) {
    total += block_end[b] - block_begin[b];
    scale = std::max(scale, block_scale[b]);
  }
  LinMap stacked(total, root_dim);
  int at = 0;
  for (int b : ids) {
    int h = block_end[b] - block_begin[b];
    stacked.middleRows(at, h) = rows.middleRows(block_begin[b], h);
    at += h;
  }
  return kernel(stacked, tol, scale);
}

ArborealReplacement arb_replace(const Quiver& q, const Representation& rep,
                                double tol) {
  rep.validate(q);
  const std::vector<VertexId> topo = top_sort(q);  // rejects cycles

  ArborealReplacement out;
  out.tol = rank_rel_tol(rep.total_dim(), rep.total_dim(), tol);
  out.augmented = augment(q);
  const Quiver& plus = out.augmented.quiver;
  const VertexId rho = out.augmented.root;
  const int n = q.num_vertices();
  const EdgeId first_new_edge = q.num_edges();

  for (EdgeId e : out.augmented.new_edges)
    out.min_vertices.push_back(plus.target(e));
  int root_dim = 0;
  std::vector<int> offset_in_root(n, -1);
  for (VertexId w : out.min_vertices) {
    out.root_block_offset.push_back(root_dim);
    offset_in_root[w] = root_dim;
    root_dim += rep.dims[w];
  }

  out.flow.root_dim = root_dim;
  out.flow.visible.assign(n + 1, {});
  out.flow_map.assign(n + 1, LinMap());
  out.flow_map[rho] = LinMap::Identity(root_dim, root_dim);

  std::vector<LinMap> blocks;
  auto edge_flow = [&](EdgeId e, VertexId v) -> LinMap {
    if (e >= first_new_edge) {
      LinMap sel = LinMap::Zero(rep.dims[v], root_dim);
      sel.middleCols(offset_in_root[v], rep.dims[v]).setIdentity();
      return sel;
    }
    return rep.maps[e] * out.flow_map[q.source(e)];
  };

  for (VertexId v : topo) {
    std::span<const EdgeId> incoming = plus.in_edges(v);
    std::vector<LinMap> arrivals;
    arrivals.reserve(incoming.size());
    std::vector<int> vis;
    for (EdgeId e : incoming) {
      arrivals.push_back(edge_flow(e, v));
      const std::vector<int>& src_vis = out.flow.visible[plus.source(e)];
      std::vector<int> merged;
      std::set_union(vis.begin(), vis.end(), src_vis.begin(), src_vis.end(),
                     std::back_inserter(merged));
      vis = std::move(merged);
    }
    out.flow_map[v] = arrivals.front();
    if (arrivals.size() > 1 && rep.dims[v] > 0) {
      for (size_t i = 0; i + 1 < arrivals.size(); ++i) {
        int id = static_cast<int>(blocks.size());
        blocks.push_back(arrivals[i] - arrivals[i + 1]);
        out.flow.block_vertex.push_back(v);
        out.flow.block_scale.push_back(
            std::max(arrivals[i].norm(), arrivals[i + 1].norm()));
        vis.push_back(id);  // fresh ids are the largest so far
      }
    }
    out.flow.visible[v] = std::move(vis);
  }

  int total_rows = 0;
  std::vector<int> begins, ends;
  for (const LinMap& b : blocks) {
    begins.push_back(total_rows);
    total_rows += static_cast<int>(b.rows());
    ends.push_back(total_rows);
  }
  out.flow.rows.resize(total_rows, root_dim);
  for (size_t i = 0; i < blocks.size(); ++i)
    out.flow.rows.middleRows(begins[i], blocks[i].rows()) = blocks[i];
  out.flow.block_begin = std::move(begins);
  out.flow.block_end = std::move(ends);

  // The flow spaces only shrink along the order, so the intersection over
  // maximal vertices sees every constraint row exactly once.
  std::vector<int> root_visible;
  for (VertexId v = 0; v < n; ++v)
    if (q.out_degree(v) == 0) {
      std::vector<int> merged;
      std::set_union(root_visible.begin(), root_visible.end(),
                     out.flow.visible[v].begin(), out.flow.visible[v].end(),
                     std::back_inserter(merged));
      root_visible = std::move(merged);
    }
  if (root_visible.empty()) {
    out.root_space = Subspace::full(root_dim, tol);
  } else {
    int rows = 0;
    double scale = 0.0;
    for (int b : root_visible) {
      rows += out.flow.block_end[b] - out.flow.block_begin[b];
      scale = std::max(scale, out.flow.block_scale[b]);
    }
    LinMap stacked(rows, root_dim);
    int at = 0;
    for (int b : root_visible) {
      int h = out.flow.block_end[b] - out.flow.block_begin[b];
      stacked.middleRows(at, h) = out.flow.rows.middleRows(out.flow.block_begin[b], h);
      at += h;
    }
    out.root_space = kernel(stacked, tol, scale);
  }

  out.tree = spanning_arborescence(plus, rho);
  auto [tq, emap] = materialize_tree(plus, out.tree);
  out.tree_quiver = std::move(tq);
  out.tree_edge_to_augmented = std::move(emap);

  const int d = out.root_space.dim();
  out.rep.dims = rep.dims;
  out.rep.dims.push_back(d);  // the root is the final vertex id
  for (EdgeId e : out.tree_edge_to_augmented) {
    if (e >= first_new_edge) {
      VertexId w = plus.target(e);
      out.rep.maps.push_back(
          out.root_space.basis().middleRows(offset_in_root[w], rep.dims[w]));
    } else {
      out.rep.maps.push_back(rep.maps[e]);
    }
  }
  return out;
}

SectionsResult sections(const Quiver& q, const Representation& rep, double tol) {
  rep.validate(q);
  SectionsResult res;
  res.trace.acyclic = acyc_reduce(q, rep, tol);
  const AcyclicReduction& ar = res.trace.acyclic;
  res.trace.arboreal = arb_replace(ar.quiver, ar.rep, tol);
  const ArborealReplacement& ab = res.trace.arboreal;

  const int n = rep.total_dim();
  const VertexId rho = ab.augmented.root;
  const int d = ab.rep.dims[rho];

  std::vector<int> tree_index(ab.augmented.quiver.num_edges(), -1);
  for (size_t i = 0; i < ab.tree_edge_to_augmented.size(); ++i)
    tree_index[ab.tree_edge_to_augmented[i]] = static_cast<int>(i);

  // Compose the replaced maps along the unique tree paths from the root,
  // then push each composite through the constrained-subspace basis.
  std::vector<LinMap> comp(ab.augmented.quiver.num_vertices());
  comp[rho] = LinMap::Identity(d, d);
  for (VertexId v : tree_order(ab.augmented.quiver, ab.tree)) {
    if (v == rho) continue;
    EdgeId e = ab.tree.parent_edge[v];
    comp[v] = ab.rep.maps[tree_index[e]] * comp[ab.augmented.quiver.source(e)];
  }

  SectionSpace& s = res.space;
  s.total_dim = n;
  s.section_dim = d;
  s.tol = rank_rel_tol(n, n, tol);
  std::vector<int> offsets = rep.block_offsets();
  s.block_offset.assign(offsets.begin(), offsets.end() - 1);
  s.block_size = rep.dims;
  s.embedding.resize(n, d);
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    s.embedding.middleRows(s.block_offset[v], rep.dims[v]) =
        ar.lambda[v].basis() * comp[v];

  double worst = 0.0;
  if (d > 0) {
    double fnorm = std::max(1.0, s.embedding.norm());
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
      const LinMap& m = rep.maps[e];
      LinMap gap = m * s.embedding.middleRows(s.block_offset[q.source(e)],
                                              rep.dims[q.source(e)]) -
                   s.embedding.middleRows(s.block_offset[q.target(e)],
                                          rep.dims[q.target(e)]);
      double scale = std::max(1.0, m.norm()) * fnorm;
      worst = std::max(worst, gap.norm() / scale);
    }
  }
  s.max_compatibility_residual = worst;

  for (const SccReduction& c : ar.components) {
    Provenance::SccChoice choice;
    choice.root = c.root;
    choice.ear_count = static_cast<int>(c.ears.ears.size());
    for (EdgeId eps : c.ears.terminal_edges)
      choice.terminal_edges.push_back(c.component.edge_to_parent[eps]);
    s.provenance.scc.push_back(std::move(choice));
  }
  s.provenance.removed_edges = ar.removed_edges;
  s.provenance.augmented_root = rho;
  s.provenance.tree_edges = ab.tree.tree_edges;
  return res;
}

Subspace naive_sections(const Quiver& q, const Representation& rep, double tol) {
  rep.validate(q);
  const int n = rep.total_dim();
  std::vector<int> offsets = rep.block_offsets();
  int rows = 0;
  for (EdgeId e = 0; e < q.num_edges(); ++e) rows += rep.dims[q.target(e)];
  LinMap m = LinMap::Zero(rows, n);
  int at = 0;
  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    const int dt = rep.dims[q.target(e)];
    const int ds = rep.dims[q.source(e)];
    m.block(at, offsets[q.target(e)], dt, dt) += LinMap::Identity(dt, dt);
    m.block(at, offsets[q.source(e)], dt, ds) -= rep.maps[e];
    at += dt;
  }
  return kernel(m, tol, 1.0);
}

std::int64_t dimension_lower_bound(const Quiver& q, const Representation& rep) {
  rep.validate(q);
  Augmentation aug = augment(q);  // rejects cyclic input
  const Quiver& plus = aug.quiver;

  constexpr std::int64_t kCap = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> paths(plus.num_vertices(), 0);
  paths[aug.root] = 1;
  for (VertexId v : top_sort(plus)) {
    for (EdgeId e : plus.out_edges(v)) {
      VertexId w = plus.target(e);
      if (paths[w] > kCap - paths[v])
        throw PathCountOverflow("path count exceeds 64-bit range at vertex " +
                                std::to_string(w));
      paths[w] += paths[v];
    }
  }

  std::int64_t bound = 0;
  for (VertexId v = 0; v < q.num_vertices(); ++v) {
    if (q.in_degree(v) == 0) bound += rep.dims[v];
    if (q.out_degree(v) == 0 && rep.dims[v] > 0) {
      std::int64_t excess = paths[v] - 1;
      if (excess > (kCap - 1) / std::max(rep.dims[v], 1))
        throw PathCountOverflow("bound term exceeds 64-bit range at vertex " +
                                std::to_string(v));
      bound -= excess * rep.dims[v];
    }
  }
  return bound;
}

Subspace group_fixed_space(const std::vector<LinMap>& generators, double tol) {
  if (generators.empty())
    throw ShapeMismatch("group_fixed_space needs at least one generator");
  const Eigen::Index n = generators.front().rows();
  for (const LinMap& g : generators)
    if (g.rows() != n || g.cols() != n)
      throw ShapeMismatch("generators must be square matrices of equal size");

  std::vector<Edge> loops(generators.size(), Edge{0, 0});
  Quiver q(1, std::move(loops));
  Representation rep{{static_cast<int>(n)}, generators};
  SectionsResult res = sections(q, rep, tol);
  return Subspace::span_of(res.space.embedding, tol);
}

std::pair<Quiver, Representation> random_sparse_instance(std::uint64_t seed,
                                                         int n_vertices, int dim,
                                                         double edge_factor) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_vertices - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n_edges = static_cast<int>(edge_factor * n_vertices);
  std::vector<Edge> edges;
  edges.reserve(n_edges);
  for (int i = 0; i < n_edges; ++i) edges.push_back(Edge{pick(rng), pick(rng)});
  Quiver q(n_vertices, std::move(edges));
  Representation rep;
  rep.dims.assign(n_vertices, dim);
  for (int e = 0; e < n_edges; ++e) {
    LinMap m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = gauss(rng);
    rep.maps.push_back(std::move(m));
  }
  return {std::move(q), std::move(rep)};
}

}  // namespace qsec
