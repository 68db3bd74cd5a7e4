#include "qsec/quiver.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

namespace qsec {

namespace {

std::string vertex_str(VertexId v) { return std::to_string(v); }

// CSR bucket build: ids ascending within each bucket because edges are
// scanned in id order.
void build_adjacency(int num_vertices, const std::vector<Edge>& edges,
                     std::vector<int>& offsets, std::vector<EdgeId>& adj,
                     bool by_source) {
  offsets.assign(num_vertices + 1, 0);
  for (const Edge& e : edges) offsets[(by_source ? e.source : e.target) + 1]++;
  for (int v = 0; v < num_vertices; ++v) offsets[v + 1] += offsets[v];
  adj.resize(edges.size());
  std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
  for (EdgeId e = 0; e < static_cast<EdgeId>(edges.size()); ++e) {
    VertexId v = by_source ? edges[e].source : edges[e].target;
    adj[cursor[v]++] = e;
  }
}

}  // namespace

Quiver::Quiver(int num_vertices, std::vector<Edge> edges)
    : num_vertices_(num_vertices), edges_(std::move(edges)) {
  if (num_vertices < 0) throw std::invalid_argument("negative vertex count");
  for (size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.source < 0 || e.source >= num_vertices_ || e.target < 0 ||
        e.target >= num_vertices_) {
      throw std::invalid_argument("edge " + std::to_string(i) +
                                  " has endpoint outside 0.." +
                                  std::to_string(num_vertices_ - 1));
    }
  }
  build_adjacency(num_vertices_, edges_, out_offsets_, out_adj_, true);
  build_adjacency(num_vertices_, edges_, in_offsets_, in_adj_, false);
}

std::span<const EdgeId> Quiver::out_edges(VertexId v) const {
  return {out_adj_.data() + out_offsets_[v],
          out_adj_.data() + out_offsets_[v + 1]};
}

std::span<const EdgeId> Quiver::in_edges(VertexId v) const {
  return {in_adj_.data() + in_offsets_[v], in_adj_.data() + in_offsets_[v + 1]};
}

QuiverPath QuiverPath::of(const Quiver& q, std::vector<EdgeId> edges) {
  if (edges.empty())
    throw std::invalid_argument("anchor an empty path with QuiverPath::trivial");
  std::set<VertexId> sources;
  for (size_t i = 0; i < edges.size(); ++i) {
    if (!sources.insert(q.source(edges[i])).second)
      throw std::invalid_argument("path edges must have distinct sources");
    if (i + 1 < edges.size() && q.target(edges[i]) != q.source(edges[i + 1]))
      throw std::invalid_argument("path edges do not chain");
  }
  VertexId src = q.source(edges.front());
  VertexId dst = q.target(edges.back());
  return QuiverPath{std::move(edges), src, dst};
}

QuiverPath Arborescence::path_from_root(const Quiver& host, VertexId v) const {
  if (v == root) return QuiverPath::trivial(root);
  std::vector<EdgeId> chain;
  VertexId cur = v;
  while (cur != root) {
    EdgeId e = parent_edge[cur];
    if (e < 0) throw std::invalid_argument("vertex not attached to the root");
    chain.push_back(e);
    cur = host.source(e);
  }
  std::reverse(chain.begin(), chain.end());
  return QuiverPath{std::move(chain), root, v};
}

// Iterative Tarjan; components come out in reverse topological order and are
// re-sorted by smallest vertex id for a stable public ordering.
std::vector<InducedSubquiver> tarjan_msc(const Quiver& q) {
  const int n = q.num_vertices();
  std::vector<int> index(n, -1), lowlink(n, 0), component(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<VertexId> stack;
  std::vector<std::vector<VertexId>> comps;
  int next_index = 0;

  struct Frame {
    VertexId v;
    size_t next_out = 0;
  };
  for (VertexId start = 0; start < n; ++start) {
    if (index[start] >= 0) continue;
    std::vector<Frame> frames{{start}};
    index[start] = lowlink[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      std::span<const EdgeId> out = q.out_edges(f.v);
      if (f.next_out < out.size()) {
        VertexId w = q.target(out[f.next_out++]);
        if (index[w] < 0) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        if (lowlink[f.v] == index[f.v]) {
          std::vector<VertexId> comp;
          VertexId w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component[w] = static_cast<int>(comps.size());
            comp.push_back(w);
          } while (w != f.v);
          comps.push_back(std::move(comp));
        }
        VertexId done = f.v;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().v] =
              std::min(lowlink[frames.back().v], lowlink[done]);
      }
    }
  }

  std::vector<InducedSubquiver> result;
  std::vector<std::vector<VertexId>> kept;
  for (auto& comp : comps) {
    bool nontrivial = comp.size() > 1;
    if (!nontrivial) {
      for (EdgeId e : q.out_edges(comp[0]))
        if (q.is_loop(e)) nontrivial = true;
    }
    if (nontrivial) kept.push_back(std::move(comp));
  }
  for (auto& comp : kept) std::sort(comp.begin(), comp.end());
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& comp : kept) {
    std::vector<bool> keep(n, false);
    for (VertexId v : comp) keep[v] = true;
    result.push_back(induced_subquiver(q, keep));
  }
  return result;
}

namespace {

std::vector<bool> reachable_from(const Quiver& q, VertexId start, bool reverse) {
  std::vector<bool> seen(q.num_vertices(), false);
  std::queue<VertexId> bfs;
  seen[start] = true;
  bfs.push(start);
  while (!bfs.empty()) {
    VertexId v = bfs.front();
    bfs.pop();
    for (EdgeId e : (reverse ? q.in_edges(v) : q.out_edges(v))) {
      VertexId w = reverse ? q.source(e) : q.target(e);
      if (!seen[w]) {
        seen[w] = true;
        bfs.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const Quiver& q) {
  if (q.num_vertices() == 0) return false;
  auto fwd = reachable_from(q, 0, false);
  auto bwd = reachable_from(q, 0, true);
  for (int v = 0; v < q.num_vertices(); ++v)
    if (!fwd[v] || !bwd[v]) return false;
  return true;
}

namespace {

// Shortest path from `from` into `stop` (breadth-first, lowest edge id wins),
// traversing only vertices outside `stop` in the interior. Returns edge ids.
std::vector<EdgeId> bfs_path_into(const Quiver& q, VertexId from,
                                  const std::vector<bool>& stop) {
  std::vector<EdgeId> via(q.num_vertices(), -1);
  std::queue<VertexId> bfs;
  std::vector<bool> discovered(q.num_vertices(), false);
  discovered[from] = true;
  bfs.push(from);
  VertexId hit = -1;
  EdgeId hit_edge = -1;
  while (!bfs.empty() && hit < 0) {
    VertexId v = bfs.front();
    bfs.pop();
    for (EdgeId e : q.out_edges(v)) {
      VertexId w = q.target(e);
      if (stop[w]) {
        hit = w;
        hit_edge = e;
        break;
      }
      if (!discovered[w]) {
        discovered[w] = true;
        via[w] = e;
        bfs.push(w);
      }
    }
  }
  if (hit < 0) return {};
  std::vector<EdgeId> path{hit_edge};
  VertexId cur = q.source(hit_edge);
  while (cur != from) {
    path.push_back(via[cur]);
    cur = q.source(via[cur]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

EarDecomposition ear_decompose(const Quiver& r,
                               std::optional<VertexId> root_hint) {
  if (!is_strongly_connected(r))
    throw NotStronglyConnected("ear decomposition requires a strongly connected quiver");
  const int n = r.num_vertices();
  const int m = r.num_edges();

  EarDecomposition dec;
  dec.edge_depth.assign(m, 0);
  dec.vertex_level.assign(n, 0);
  std::vector<bool> visited(n, false), used(m, false);

  auto absorb = [&](const Ear& ear, int depth) {
    for (EdgeId e : ear.edges) {
      used[e] = true;
      dec.edge_depth[e] = depth;
      for (VertexId v : {r.source(e), r.target(e)})
        if (!visited[v]) {
          visited[v] = true;
          dec.vertex_level[v] = depth;
        }
    }
  };

  // First ear: a cycle through the root, or the root alone if edge-free.
  VertexId root = root_hint.value_or(m > 0 ? r.source(0) : 0);
  if (root < 0 || root >= n) throw std::invalid_argument("root_hint out of range");
  dec.root = root;
  Ear first{{}, root, root};
  if (m > 0) {
    EdgeId e0 = r.out_edges(root)[0];  // nonempty: strongly connected with edges
    first.edges.push_back(e0);
    if (r.target(e0) != root) {
      std::vector<bool> stop(n, false);
      stop[root] = true;
      auto back = bfs_path_into(r, r.target(e0), stop);
      first.edges.insert(first.edges.end(), back.begin(), back.end());
    }
  }
  visited[root] = true;
  dec.vertex_level[root] = 1;
  absorb(first, 1);
  dec.ears.push_back(std::move(first));

  int remaining = m - static_cast<int>(dec.ears[0].edges.size());
  while (remaining > 0) {
    EdgeId next = -1;
    for (EdgeId e = 0; e < m; ++e)
      if (!used[e] && visited[r.source(e)]) {
        next = e;
        break;
      }
    // A candidate always exists: some unused edge leaves the visited set.
    Ear ear{{next}, r.source(next), r.target(next)};
    if (!visited[r.target(next)]) {
      auto back = bfs_path_into(r, r.target(next), visited);
      ear.edges.insert(ear.edges.end(), back.begin(), back.end());
      ear.target = r.target(ear.edges.back());
    }
    remaining -= static_cast<int>(ear.edges.size());
    absorb(ear, static_cast<int>(dec.ears.size()) + 1);
    dec.ears.push_back(std::move(ear));
  }

  for (const Ear& ear : dec.ears)
    if (!ear.edges.empty()) dec.terminal_edges.push_back(ear.edges.back());
  return dec;
}

Arborescence induced_arborescence(const Quiver& r, const EarDecomposition& d) {
  std::vector<bool> terminal(r.num_edges(), false);
  for (EdgeId e : d.terminal_edges) terminal[e] = true;

  Arborescence t;
  t.num_vertices = r.num_vertices();
  t.root = d.root;
  t.parent_edge.assign(r.num_vertices(), -1);
  for (EdgeId e = 0; e < r.num_edges(); ++e) {
    if (terminal[e]) continue;
    VertexId v = r.target(e);
    if (t.parent_edge[v] != -1)
      throw Error("ear decomposition did not induce an arborescence at vertex " +
                  vertex_str(v));
    t.parent_edge[v] = e;
    t.tree_edges.push_back(e);
  }
  return t;
}

Augmentation augment(const Quiver& q) {
  top_sort(q);  // rejects cyclic input with a witness
  Augmentation aug;
  aug.root = q.num_vertices();
  std::vector<Edge> edges = q.edges();
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    if (q.in_degree(v) == 0) {
      aug.new_edges.push_back(static_cast<EdgeId>(edges.size()));
      edges.push_back(Edge{aug.root, v});
    }
  aug.quiver = Quiver(q.num_vertices() + 1, std::move(edges));
  return aug;
}

namespace {

// A directed cycle in q restricted to `alive` vertices, as edge ids. Every
// alive vertex is assumed to have an alive out-neighbour.
std::vector<EdgeId> find_cycle(const Quiver& q, const std::vector<bool>& alive) {
  VertexId start = -1;
  for (int v = 0; v < q.num_vertices(); ++v)
    if (alive[v]) {
      start = v;
      break;
    }
  std::vector<int> seen_at(q.num_vertices(), -1);
  std::vector<EdgeId> walk;
  VertexId cur = start;
  int step = 0;
  while (seen_at[cur] < 0) {
    seen_at[cur] = step++;
    for (EdgeId e : q.out_edges(cur))
      if (alive[q.target(e)]) {
        walk.push_back(e);
        cur = q.target(e);
        break;
      }
  }
  return {walk.begin() + seen_at[cur], walk.end()};
}

}  // namespace

std::vector<VertexId> top_sort(const Quiver& q) {
  const int n = q.num_vertices();
  std::vector<int> indegree(n, 0);
  for (const Edge& e : q.edges()) indegree[e.target]++;

  std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
  for (VertexId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);

  std::vector<VertexId> order;
  order.reserve(n);
  while (!ready.empty()) {
    VertexId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (EdgeId e : q.out_edges(v))
      if (--indegree[q.target(e)] == 0) ready.push(q.target(e));
  }
  if (static_cast<int>(order.size()) < n) {
    std::vector<bool> alive(n, false);
    for (VertexId v = 0; v < n; ++v) alive[v] = indegree[v] > 0;
    throw CyclicInput("quiver has a directed cycle", find_cycle(q, alive));
  }
  return order;
}

Arborescence spanning_arborescence(const Quiver& q, VertexId root) {
  if (root < 0 || root >= q.num_vertices())
    throw std::invalid_argument("root out of range");
  Arborescence t;
  t.num_vertices = q.num_vertices();
  t.root = root;
  t.parent_edge.assign(q.num_vertices(), -1);

  std::vector<bool> seen(q.num_vertices(), false);
  std::queue<VertexId> bfs;
  seen[root] = true;
  bfs.push(root);
  while (!bfs.empty()) {
    VertexId v = bfs.front();
    bfs.pop();
    for (EdgeId e : q.out_edges(v)) {
      VertexId w = q.target(e);
      if (!seen[w]) {
        seen[w] = true;
        t.parent_edge[w] = e;
        t.tree_edges.push_back(e);
        bfs.push(w);
      }
    }
  }
  std::vector<VertexId> missing;
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    if (!seen[v]) missing.push_back(v);
  if (!missing.empty())
    throw Unreachable(std::to_string(missing.size()) +
                          " vertices unreachable from vertex " + vertex_str(root),
                      missing);
  std::sort(t.tree_edges.begin(), t.tree_edges.end());
  return t;
}

InducedSubquiver induced_subquiver(const Quiver& q, const std::vector<bool>& keep) {
  if (static_cast<int>(keep.size()) != q.num_vertices())
    throw std::invalid_argument("keep mask size mismatch");
  InducedSubquiver s;
  s.parent_to_vertex.assign(q.num_vertices(), -1);
  for (VertexId v = 0; v < q.num_vertices(); ++v)
    if (keep[v]) {
      s.parent_to_vertex[v] = static_cast<VertexId>(s.vertex_to_parent.size());
      s.vertex_to_parent.push_back(v);
    }
  std::vector<Edge> edges;
  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    const Edge& ed = q.edge(e);
    if (keep[ed.source] && keep[ed.target]) {
      s.edge_to_parent.push_back(e);
      edges.push_back(Edge{s.parent_to_vertex[ed.source], s.parent_to_vertex[ed.target]});
    }
  }
  s.quiver = Quiver(static_cast<int>(s.vertex_to_parent.size()), std::move(edges));
  return s;
}

InducedSubquiver induced_subquiver(const Quiver& q, std::span<const VertexId> keep) {
  std::vector<bool> mask(q.num_vertices(), false);
  for (VertexId v : keep) {
    if (v < 0 || v >= q.num_vertices())
      throw std::invalid_argument("kept vertex out of range");
    mask[v] = true;
  }
  return induced_subquiver(q, mask);
}

}  // namespace qsec
