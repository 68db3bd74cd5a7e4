#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qsec/errors.hpp"

namespace qsec {

using VertexId = int;
using EdgeId = int;

struct Edge {
  VertexId source = -1;
  VertexId target = -1;
};

/// Finite directed multigraph with dense integer ids. Loops and parallel
/// edges are allowed. Immutable after construction, so instances can be
/// shared freely across threads.
class Quiver {
 public:
  Quiver() = default;
  Quiver(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  VertexId source(EdgeId e) const { return edges_[e].source; }
  VertexId target(EdgeId e) const { return edges_[e].target; }
  bool is_loop(EdgeId e) const { return edges_[e].source == edges_[e].target; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Incident edge ids, ascending.
  std::span<const EdgeId> out_edges(VertexId v) const;
  std::span<const EdgeId> in_edges(VertexId v) const;

  int out_degree(VertexId v) const { return static_cast<int>(out_edges(v).size()); }
  int in_degree(VertexId v) const { return static_cast<int>(in_edges(v).size()); }

 private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> out_offsets_, in_offsets_;
  std::vector<EdgeId> out_adj_, in_adj_;
};

/// A path: consecutive edges chain (target of one is source of the next) and
/// no two edges share a source. The empty path is anchored at one vertex.
struct QuiverPath {
  std::vector<EdgeId> edges;
  VertexId source = -1;
  VertexId target = -1;

  static QuiverPath trivial(VertexId v) { return QuiverPath{{}, v, v}; }
  // Validates chaining and source-distinctness against the host quiver.
  static QuiverPath of(const Quiver& q, std::vector<EdgeId> edges);

  int length() const { return static_cast<int>(edges.size()); }
  bool is_cycle() const { return source == target; }
};

struct Ear {
  std::vector<EdgeId> edges;  // empty only for a single-vertex first ear
  VertexId source = -1;
  VertexId target = -1;
};

/// Ordered partition of a strongly connected quiver's edges: the first ear is
/// a cycle (or a lone vertex), each later ear a path meeting the earlier ears
/// only at its endpoints.
struct EarDecomposition {
  VertexId root = -1;                  // source of the first ear
  std::vector<Ear> ears;
  std::vector<int> edge_depth;         // 1-based ear index per edge
  std::vector<int> vertex_level;       // smallest ear index containing v
  std::vector<EdgeId> terminal_edges;  // last edge of each ear, in ear order
};

/// Rooted spanning tree over a host quiver's vertices: every non-root vertex
/// has exactly one incoming tree edge, identified by its host edge id.
struct Arborescence {
  int num_vertices = 0;
  VertexId root = -1;
  std::vector<EdgeId> parent_edge;  // host edge into v; -1 at the root
  std::vector<EdgeId> tree_edges;   // all parent_edge values, ascending

  // Unique path root -> v, as host edge ids.
  QuiverPath path_from_root(const Quiver& host, VertexId v) const;
};

struct InducedSubquiver {
  Quiver quiver;
  std::vector<VertexId> vertex_to_parent;  // new -> old
  std::vector<EdgeId> edge_to_parent;      // new -> old
  std::vector<VertexId> parent_to_vertex;  // old -> new, -1 when dropped
};

struct Augmentation {
  Quiver quiver;      // input plus a new root and one edge per minimal vertex
  VertexId root = -1; // id of the new vertex (== input num_vertices)
  std::vector<EdgeId> new_edges;  // added edge ids, ascending by target
};

/// Maximal strongly connected subquivers, vertex-disjoint, each with all its
/// internal edges (loops included). Isolated loop-free vertices are omitted.
/// Components are ordered by smallest contained vertex id.
std::vector<InducedSubquiver> tarjan_msc(const Quiver& q);

/// True when every vertex reaches every other. The empty quiver is not
/// strongly connected; a single vertex (with or without loops) is.
bool is_strongly_connected(const Quiver& q);

/// Ear-decomposes a strongly connected quiver. Deterministic: the first ear
/// starts with the lowest-id edge (or the lowest-id edge out of root_hint),
/// and every later ear starts with the lowest-id unused edge leaving the
/// visited set. Throws NotStronglyConnected.
EarDecomposition ear_decompose(const Quiver& r,
                               std::optional<VertexId> root_hint = {});

/// The arborescence left after removing all terminal edges.
Arborescence induced_arborescence(const Quiver& r, const EarDecomposition& d);

/// Adds a root vertex with one edge to each minimal vertex (no incoming
/// edges). Input must be acyclic; throws CyclicInput.
Augmentation augment(const Quiver& q);

/// Linear order respecting all edges; ties resolved by lowest vertex id.
/// Throws CyclicInput with a witness cycle.
std::vector<VertexId> top_sort(const Quiver& q);

/// Breadth-first spanning arborescence rooted at `root`, tie-breaking by
/// lowest edge id. Throws Unreachable listing the missed vertices.
Arborescence spanning_arborescence(const Quiver& q, VertexId root);

/// Subquiver on the kept vertices with all edges among them, plus id maps.
InducedSubquiver induced_subquiver(const Quiver& q, const std::vector<bool>& keep);
InducedSubquiver induced_subquiver(const Quiver& q, std::span<const VertexId> keep);

}  // namespace qsec
