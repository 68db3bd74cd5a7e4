#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qsec/quiver.hpp"
#include "qsec/subspace.hpp"

namespace qsec {

/// Per-vertex dimensions plus one matrix per edge of shape
/// dim(target) x dim(source). Zero-dimensional vertex spaces are allowed.
struct Representation {
  std::vector<int> dims;
  std::vector<LinMap> maps;

  int total_dim() const;
  std::vector<int> block_offsets() const;
  /// Checks map shapes against the quiver and that all entries are finite.
  void validate(const Quiver& q) const;
};

/// Choices made while computing a section space; reproduced in reports.
struct Provenance {
  struct SccChoice {
    VertexId root = -1;
    int ear_count = 0;
    std::vector<EdgeId> terminal_edges;  // parent ids
  };
  std::vector<SccChoice> scc;
  std::vector<EdgeId> removed_edges;  // all terminal edges dropped from the input
  VertexId augmented_root = -1;
  std::vector<EdgeId> tree_edges;     // spanning arborescence, augmented-quiver ids
};

/// Full-rank embedding of the space of sections into the total space, with
/// the per-vertex block layout of the representation it came from.
struct SectionSpace {
  int total_dim = 0;    // n
  int section_dim = 0;  // d
  LinMap embedding;     // n x d
  std::vector<int> block_offset;
  std::vector<int> block_size;
  double tol = 0.0;
  double max_compatibility_residual = 0.0;  // max over edges, relative
  Provenance provenance;

  LinMap vertex_block(VertexId v) const {
    return embedding.middleRows(block_offset[v], block_size[v]);
  }
};

/// One strongly connected component after reduction.
struct SccReduction {
  InducedSubquiver component;  // local ids
  EarDecomposition ears;       // on the component
  Arborescence tree;           // induced arborescence, local ids
  VertexId root = -1;          // parent id of the component root
  Subspace root_space;         // K inside the root's vertex space
};

/// sc_reduce output: arborescence plus the representation with the root
/// space cut down to K and outgoing root maps restricted.
struct SccReduceResult {
  EarDecomposition ears;
  Arborescence tree;  // on the input quiver
  Subspace root_space;
  Quiver tree_quiver;
  std::vector<EdgeId> tree_edge_to_parent;
  Representation reduced;  // of tree_quiver; root block in K coordinates
};

/// acyc_reduce output: terminal edges removed everywhere, vertex spaces cut
/// down to the constrained subspaces, maps restricted.
struct AcyclicReduction {
  Quiver quiver;                       // same vertices, surviving edges
  std::vector<EdgeId> edge_to_parent;  // reduced edge -> input edge
  std::vector<EdgeId> removed_edges;   // input ids, ascending
  Representation rep;                  // in constrained-subspace coordinates
  std::vector<Subspace> lambda;        // constrained subspace at each vertex
  std::vector<SccReduction> components;
};

/// Flow spaces in kernel form: the flow space at v is the null space of the
/// constraint rows visible at v. Rows live in the stacked minimal-vertex
/// space; blocks are appended in topological processing order, so one kernel
/// of the full matrix yields the root space.
struct FlowConstraints {
  int root_dim = 0;
  LinMap rows;                         // total_rows x root_dim
  std::vector<int> block_begin;
  std::vector<int> block_end;
  std::vector<VertexId> block_vertex;  // vertex whose equaliser added the block
  std::vector<double> block_scale;     // magnitude of the cancelling terms
  std::vector<std::vector<int>> visible;  // per augmented vertex, sorted block ids

  Subspace flow_space(VertexId v, double tol = -1.0) const;
};

/// arb_replace output: augmented quiver, spanning arborescence, and the
/// replaced representation whose root space is the space of sections.
struct ArborealReplacement {
  Augmentation augmented;
  Arborescence tree;  // on augmented.quiver
  Quiver tree_quiver;
  std::vector<EdgeId> tree_edge_to_augmented;
  Representation rep;    // of tree_quiver; root dimension == section dimension
  Subspace root_space;   // inside the stacked minimal-vertex space
  std::vector<VertexId> min_vertices;
  std::vector<int> root_block_offset;  // per minimal vertex
  FlowConstraints flow;
  std::vector<LinMap> flow_map;  // per augmented vertex: extension of the flow
                                 // map to the whole root space domain
  double tol = 0.0;
};

struct PipelineTrace {
  AcyclicReduction acyclic;
  ArborealReplacement arboreal;
};

struct SectionsResult {
  SectionSpace space;
  PipelineTrace trace;
};

/// Ear-decomposes a strongly connected quiver, removes terminal edges, and
/// intersects the kernels of the path-difference maps into the root space.
/// Throws NotStronglyConnected.
SccReduceResult sc_reduce(const Quiver& r, const Representation& rep,
                          double tol = -1.0);

/// Removes the terminal edges of every maximal strongly connected component
/// and restricts each vertex space to the subspace whose vectors stay
/// compatible along every surviving path into a reduced root.
AcyclicReduction acyc_reduce(const Quiver& q, const Representation& rep,
                             double tol = -1.0);

/// Augments an acyclic quiver with a root, sweeps flow constraints in
/// topological order, and rebuilds the representation on a breadth-first
/// spanning arborescence. Throws CyclicInput.
ArborealReplacement arb_replace(const Quiver& q, const Representation& rep,
                                double tol = -1.0);

/// The full pipeline: acyc_reduce, arb_replace, then assembly of the
/// embedding by composing maps along tree paths from the root.
SectionsResult sections(const Quiver& q, const Representation& rep,
                        double tol = -1.0);

/// Kernel of the block constraint matrix (one row block per edge, minus the
/// edge map under the source block and the identity under the target block).
/// Independent of the pipeline; used as its oracle.
Subspace naive_sections(const Quiver& q, const Representation& rep,
                        double tol = -1.0);

/// Sum of minimal-vertex dimensions minus sum over maximal vertices of
/// (path count - 1) * dimension; may be negative. Throws CyclicInput or
/// PathCountOverflow.
std::int64_t dimension_lower_bound(const Quiver& q, const Representation& rep);

/// Common fixed space of a family of square maps, computed as the sections
/// of the one-vertex quiver with one loop per generator. Throws ShapeMismatch.
Subspace group_fixed_space(const std::vector<LinMap>& generators,
                           double tol = -1.0);

/// Reproducible sparse instance family (dimension `dim` everywhere,
/// edge_factor * n_vertices random edges, standard normal map entries).
std::pair<Quiver, Representation> random_sparse_instance(std::uint64_t seed,
                                                         int n_vertices, int dim,
                                                         double edge_factor = 2.0);

}  // namespace qsec
