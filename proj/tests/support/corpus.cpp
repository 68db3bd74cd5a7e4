#include "support/corpus.hpp"

#include <algorithm>
#include <numeric>

namespace qsec::testsupport {

LinMap random_matrix(Rng& rng, int rows, int cols, const InstanceOptions& opts) {
  LinMap m(rows, cols);
  if (opts.real_maps) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  } else {
    std::uniform_int_distribution<int> entry(-opts.entry_range, opts.entry_range);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = entry(rng);
  }
  return m;
}

LinMap random_orthogonal(Rng& rng, int n) {
  InstanceOptions real;
  real.real_maps = true;
  LinMap g = random_matrix(rng, n, n, real);
  Eigen::HouseholderQR<LinMap> qr(g);
  LinMap q = qr.householderQ();
  return q;
}

LinMap random_invertible(Rng& rng, int n) {
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  LinMap left = random_orthogonal(rng, n);
  LinMap right = random_orthogonal(rng, n);
  Eigen::VectorXd diag(n);
  for (int i = 0; i < n; ++i) diag(i) = scale(rng);
  return left * diag.asDiagonal() * right;
}

Quiver random_quiver(Rng& rng, const InstanceOptions& opts) {
  std::uniform_int_distribution<int> nv(opts.min_vertices, opts.max_vertices);
  int n = nv(rng);
  std::uniform_int_distribution<int> ne(0, opts.max_edges);
  int m = ne(rng);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) edges.push_back(Edge{pick(rng), pick(rng)});
  return Quiver(n, std::move(edges));
}

Quiver random_strongly_connected(Rng& rng, int n_vertices, int extra_edges) {
  // A random cycle through every vertex plus extra chords keeps the quiver
  // strongly connected by construction.
  std::vector<VertexId> order(n_vertices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (int i = 0; i < n_vertices; ++i)
    edges.push_back(Edge{order[i], order[(i + 1) % n_vertices]});
  std::uniform_int_distribution<int> pick(0, n_vertices - 1);
  for (int i = 0; i < extra_edges; ++i) edges.push_back(Edge{pick(rng), pick(rng)});
  return Quiver(n_vertices, std::move(edges));
}

Quiver random_acyclic(Rng& rng, int n_vertices, int n_edges) {
  std::vector<VertexId> order(n_vertices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> rank(n_vertices);
  for (int i = 0; i < n_vertices; ++i) rank[order[i]] = i;
  std::uniform_int_distribution<int> pick(0, n_vertices - 1);
  std::vector<Edge> edges;
  int guard = 0;
  while (static_cast<int>(edges.size()) < n_edges && guard++ < 100 * n_edges) {
    int u = pick(rng), v = pick(rng);
    if (rank[u] < rank[v]) edges.push_back(Edge{u, v});
  }
  return Quiver(n_vertices, std::move(edges));
}

Quiver random_arborescence(Rng& rng, int n_vertices) {
  std::vector<VertexId> order(n_vertices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (int i = 1; i < n_vertices; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.push_back(Edge{order[parent(rng)], order[i]});
  }
  return Quiver(n_vertices, std::move(edges));
}

Representation random_representation(Rng& rng, const Quiver& q,
                                     const InstanceOptions& opts) {
  Representation rep;
  std::uniform_int_distribution<int> dim(1, opts.max_dim);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int v = 0; v < q.num_vertices(); ++v)
    rep.dims.push_back(coin(rng) < opts.zero_dim_prob ? 0 : dim(rng));
  for (int e = 0; e < q.num_edges(); ++e)
    rep.maps.push_back(
        random_matrix(rng, rep.dims[q.target(e)], rep.dims[q.source(e)], opts));
  return rep;
}

std::pair<Quiver, Representation> random_instance(Rng& rng,
                                                  const InstanceOptions& opts) {
  Quiver q = random_quiver(rng, opts);
  Representation rep = random_representation(rng, q, opts);
  return {std::move(q), std::move(rep)};
}

std::pair<Quiver, Representation> instance_with_sections(Rng& rng, int min_dim,
                                                         int max_dim,
                                                         const InstanceOptions& opts) {
  for (int attempt = 0; attempt < 2000; ++attempt) {
    auto [q, rep] = random_instance(rng, opts);
    Subspace naive = naive_sections(q, rep);
    if (naive.dim() >= min_dim && naive.dim() <= max_dim)
      return {std::move(q), std::move(rep)};
  }
  throw std::runtime_error("could not generate an instance with the requested section dimension");
}

Dataset random_dataset(Rng& rng, int samples, int width) {
  InstanceOptions real;
  real.real_maps = true;
  Dataset d{random_matrix(rng, samples, width, real), false};
  d.centre();
  return d;
}

Dataset dataset_in_sections(Rng& rng, int samples, const SectionSpace& space) {
  InstanceOptions real;
  real.real_maps = true;
  LinMap coeffs = random_matrix(rng, samples, space.section_dim, real);
  Dataset d{coeffs * space.embedding.transpose(), false};
  d.centre();
  return d;
}

}  // namespace qsec::testsupport
