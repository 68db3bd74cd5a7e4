#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "qsec/quiver.hpp"
#include "support/corpus.hpp"

using namespace qsec;
using testsupport::Rng;

namespace {

Quiver make(int n, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<Edge> es;
  for (auto [s, t] : edges) es.push_back(Edge{s, t});
  return Quiver(n, std::move(es));
}

// Brute-force strongly connected components by reachability closure.
std::vector<std::set<VertexId>> brute_sccs(const Quiver& q) {
  const int n = q.num_vertices();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int v = 0; v < n; ++v) reach[v][v] = true;
  for (const Edge& e : q.edges()) reach[e.source][e.target] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;

  std::vector<bool> seen(n, false);
  std::vector<std::set<VertexId>> comps;
  for (int v = 0; v < n; ++v) {
    if (seen[v]) continue;
    std::set<VertexId> comp;
    for (int w = 0; w < n; ++w)
      if (reach[v][w] && reach[w][v]) comp.insert(w);
    for (int w : comp) seen[w] = true;
    bool keep = comp.size() > 1;
    for (EdgeId e : q.out_edges(v))
      if (q.is_loop(e)) keep = true;
    if (keep) comps.push_back(std::move(comp));
  }
  return comps;
}

void check_ear_axioms(const Quiver& r, const EarDecomposition& d) {
  // Axiom 1: edge sets partition E.
  std::vector<int> covered(r.num_edges(), 0);
  for (const Ear& ear : d.ears)
    for (EdgeId e : ear.edges) covered[e]++;
  for (int c : covered) CHECK(c == 1);

  // Axiom 2: the first ear is a vertex or a cycle, later ears are paths.
  std::set<VertexId> earlier;
  for (size_t i = 0; i < d.ears.size(); ++i) {
    const Ear& ear = d.ears[i];
    if (i == 0) {
      if (ear.edges.empty()) {
        CHECK(ear.source == ear.target);
      } else {
        QuiverPath p = QuiverPath::of(r, ear.edges);
        CHECK(p.source == d.root);
        CHECK(p.is_cycle());
      }
    } else {
      REQUIRE(!ear.edges.empty());
      QuiverPath p = QuiverPath::of(r, ear.edges);
      // Axiom 3: new vertices only in the interior.
      std::set<VertexId> mine;
      for (EdgeId e : ear.edges) {
        mine.insert(r.source(e));
        mine.insert(r.target(e));
      }
      std::set<VertexId> overlap;
      for (VertexId v : mine)
        if (earlier.count(v)) overlap.insert(v);
      std::set<VertexId> endpoints{p.source, p.target};
      CHECK(overlap == endpoints);
      CHECK(overlap.size() == (p.is_cycle() ? 1u : 2u));
    }
    for (EdgeId e : ear.edges) {
      earlier.insert(r.source(e));
      earlier.insert(r.target(e));
    }
    if (i == 0) earlier.insert(d.root);
  }
}

void check_arborescence(const Quiver& host, const Arborescence& t) {
  CHECK(t.parent_edge[t.root] == -1);
  for (VertexId v = 0; v < t.num_vertices; ++v) {
    if (v == t.root) continue;
    REQUIRE(t.parent_edge[v] >= 0);
    CHECK(host.target(t.parent_edge[v]) == v);
    QuiverPath p = t.path_from_root(host, v);
    CHECK(p.source == t.root);
    CHECK(p.target == v);
  }
}

// Monotone-depth path search used to validate increasing/decreasing paths.
bool monotone_path_exists(const Quiver& r, const EarDecomposition& d, VertexId from,
                          VertexId to, bool increasing, int max_depth) {
  std::set<std::pair<VertexId, int>> seen;
  std::vector<std::pair<VertexId, int>> stack{{from, increasing ? 0 : max_depth + 1}};
  while (!stack.empty()) {
    auto [v, depth] = stack.back();
    stack.pop_back();
    if (v == to && ((increasing && depth > 0) || (!increasing && depth <= max_depth)))
      return true;
    if (!seen.insert({v, depth}).second) continue;
    for (EdgeId e : r.out_edges(v)) {
      int ed = d.edge_depth[e];
      if (ed > max_depth) continue;
      bool ok = increasing ? ed >= depth : ed <= depth;
      if (ok) stack.push_back({r.target(e), ed});
    }
  }
  return false;
}

}  // namespace

TEST_SUITE_BEGIN("quiver");

TEST_CASE("tarjan: single loop forms a component") {
  Quiver q = make(1, {{0, 0}});
  auto msc = tarjan_msc(q);
  REQUIRE(msc.size() == 1);
  CHECK(msc[0].quiver.num_vertices() == 1);
  CHECK(msc[0].quiver.num_edges() == 1);
}

TEST_CASE("tarjan: parallel edges give no cycle") {
  Quiver q = make(2, {{0, 1}, {0, 1}});
  CHECK(tarjan_msc(q).empty());
}

TEST_CASE("tarjan: running seven-vertex example matches brute force") {
  // One strongly connected block on {1,2,3,4} with six edges, approached
  // from vertex 0 and draining into a chain 4 -> 5 -> 6.
  Quiver q = make(7, {{1, 2},
                      {2, 3},
                      {3, 4},
                      {4, 1},
                      {2, 4},
                      {3, 1},
                      {0, 2},
                      {4, 5},
                      {5, 6}});
  auto msc = tarjan_msc(q);
  auto brute = brute_sccs(q);
  REQUIRE(msc.size() == brute.size());
  REQUIRE(msc.size() == 1);
  std::set<VertexId> got(msc[0].vertex_to_parent.begin(),
                         msc[0].vertex_to_parent.end());
  CHECK(got == brute[0]);
  CHECK(msc[0].quiver.num_edges() == 6);  // all internal edges retained
}

TEST_CASE("tarjan: components on a random corpus match brute force") {
  Rng rng(7001);
  testsupport::InstanceOptions opts;
  for (int trial = 0; trial < 120; ++trial) {
    Quiver q = testsupport::random_quiver(rng, opts);
    auto msc = tarjan_msc(q);
    auto brute = brute_sccs(q);
    REQUIRE(msc.size() == brute.size());
    std::set<VertexId> used;
    for (size_t i = 0; i < msc.size(); ++i) {
      std::set<VertexId> got(msc[i].vertex_to_parent.begin(),
                             msc[i].vertex_to_parent.end());
      CHECK(got == brute[i]);
      CHECK(is_strongly_connected(msc[i].quiver));
      for (VertexId v : got) CHECK(!used.count(v));
      used.insert(got.begin(), got.end());
    }
    // Contracting the components leaves an acyclic quiver.
    std::vector<int> comp_of(q.num_vertices(), -1);
    for (size_t i = 0; i < msc.size(); ++i)
      for (VertexId v : msc[i].vertex_to_parent) comp_of[v] = static_cast<int>(i);
    int next = static_cast<int>(msc.size());
    for (int v = 0; v < q.num_vertices(); ++v)
      if (comp_of[v] < 0) comp_of[v] = next++;
    std::vector<Edge> contracted;
    for (const Edge& e : q.edges())
      if (comp_of[e.source] != comp_of[e.target])
        contracted.push_back(Edge{comp_of[e.source], comp_of[e.target]});
    CHECK_NOTHROW(top_sort(Quiver(next, std::move(contracted))));
  }
}

TEST_CASE("ear decomposition: single vertex with loop") {
  Quiver q = make(1, {{0, 0}});
  EarDecomposition d = ear_decompose(q);
  REQUIRE(d.ears.size() == 1);
  CHECK(d.ears[0].edges == std::vector<EdgeId>{0});
  CHECK(d.terminal_edges == std::vector<EdgeId>{0});
  check_ear_axioms(q, d);
}

TEST_CASE("ear decomposition: directed 3-cycle") {
  Quiver q = make(3, {{0, 1}, {1, 2}, {2, 0}});
  EarDecomposition d = ear_decompose(q);
  REQUIRE(d.ears.size() == 1);
  CHECK(d.root == 0);
  CHECK(d.terminal_edges == std::vector<EdgeId>{2});  // the edge back into the root
  check_ear_axioms(q, d);
}

TEST_CASE("ear decomposition: seven-vertex block has three ears") {
  Quiver block = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}, {2, 0}});
  EarDecomposition d = ear_decompose(block);
  CHECK(d.ears.size() == 3);
  CHECK(d.terminal_edges.size() == 3);
  check_ear_axioms(block, d);
}

TEST_CASE("ear decomposition: not strongly connected input is rejected") {
  CHECK_THROWS_AS(ear_decompose(make(2, {{0, 1}})), NotStronglyConnected);
}

TEST_CASE("ear decomposition: random corpus satisfies the axioms") {
  Rng rng(7002);
  for (int trial = 0; trial < 80; ++trial) {
    std::uniform_int_distribution<int> nv(1, 7), extra(0, 6);
    Quiver r = testsupport::random_strongly_connected(rng, nv(rng), extra(rng));
    EarDecomposition d = ear_decompose(r);
    check_ear_axioms(r, d);

    Arborescence t = induced_arborescence(r, d);
    check_arborescence(r, t);

    // Increasing and decreasing connections exist within each vertex level.
    for (VertexId v = 0; v < r.num_vertices(); ++v) {
      if (v == d.root) continue;
      CHECK(monotone_path_exists(r, d, d.root, v, true, d.vertex_level[v]));
      CHECK(monotone_path_exists(r, d, v, d.root, false, d.vertex_level[v]));
    }

    // The increasing tree path never exceeds the vertex level.
    for (VertexId v = 0; v < r.num_vertices(); ++v) {
      QuiverPath p = t.path_from_root(r, v);
      for (EdgeId e : p.edges) CHECK(d.edge_depth[e] <= d.vertex_level[v]);
    }

    // Root hints pin the root.
    std::uniform_int_distribution<int> pick(0, r.num_vertices() - 1);
    VertexId hint = pick(rng);
    if (r.num_edges() > 0) {
      EarDecomposition hinted = ear_decompose(r, hint);
      CHECK(hinted.root == hint);
      check_ear_axioms(r, hinted);
    }
  }
}

TEST_CASE("induced arborescence: 3-cycle gives a path of length two") {
  Quiver q = make(3, {{0, 1}, {1, 2}, {2, 0}});
  Arborescence t = induced_arborescence(q, ear_decompose(q));
  CHECK(t.tree_edges == std::vector<EdgeId>{0, 1});
  CHECK(t.path_from_root(q, 2).length() == 2);
}

TEST_CASE("induced arborescence: lone loop leaves a bare vertex") {
  Quiver q = make(1, {{0, 0}});
  Arborescence t = induced_arborescence(q, ear_decompose(q));
  CHECK(t.tree_edges.empty());
  CHECK(t.root == 0);
}

TEST_CASE("augment: single vertex") {
  Augmentation aug = augment(make(1, {}));
  CHECK(aug.root == 1);
  CHECK(aug.new_edges.size() == 1);
  CHECK(aug.quiver.num_edges() == 1);
}

TEST_CASE("augment: two-arrow quiver has one minimal vertex") {
  // U <- V -> W with V minimal.
  Quiver q = make(3, {{1, 0}, {1, 2}});
  Augmentation aug = augment(q);
  REQUIRE(aug.new_edges.size() == 1);
  CHECK(aug.quiver.target(aug.new_edges[0]) == 1);
}

TEST_CASE("augment: reduced seven-vertex example gains two edges") {
  // The acyclic reduction of the running example: block edges minus its
  // three terminal edges, plus the outside edges. Minimal vertices: 0 and
  // the block root 1.
  Quiver block = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}, {2, 0}});
  EarDecomposition d = ear_decompose(block);
  std::set<EdgeId> terminal(d.terminal_edges.begin(), d.terminal_edges.end());
  std::vector<Edge> edges;
  for (EdgeId e = 0; e < block.num_edges(); ++e)
    if (!terminal.count(e))
      edges.push_back(Edge{block.source(e) + 1, block.target(e) + 1});
  edges.push_back(Edge{0, 2});
  edges.push_back(Edge{4, 5});
  edges.push_back(Edge{5, 6});
  Quiver reduced(7, std::move(edges));
  Augmentation aug = augment(reduced);
  CHECK(aug.new_edges.size() == 2);
  CHECK(aug.quiver.target(aug.new_edges[0]) == 0);
  CHECK(aug.quiver.target(aug.new_edges[1]) == 1);
}

TEST_CASE("augment rejects cyclic input") {
  CHECK_THROWS_AS(augment(make(2, {{0, 1}, {1, 0}})), CyclicInput);
}

TEST_CASE("top_sort: chain, empty, cycle witness") {
  CHECK(top_sort(make(3, {{0, 1}, {1, 2}})) == std::vector<VertexId>{0, 1, 2});
  CHECK(top_sort(make(4, {})) == std::vector<VertexId>{0, 1, 2, 3});
  try {
    top_sort(make(2, {{0, 1}, {1, 0}}));
    FAIL("expected CyclicInput");
  } catch (const CyclicInput& e) {
    std::set<EdgeId> witness(e.witness_cycle.begin(), e.witness_cycle.end());
    CHECK(witness == std::set<EdgeId>{0, 1});
  }
}

TEST_CASE("top_sort: loop witness is the loop") {
  try {
    top_sort(make(1, {{0, 0}}));
    FAIL("expected CyclicInput");
  } catch (const CyclicInput& e) {
    CHECK(e.witness_cycle == std::vector<EdgeId>{0});
  }
}

TEST_CASE("top_sort succeeds exactly when no component and no loop exists") {
  Rng rng(7003);
  for (int trial = 0; trial < 100; ++trial) {
    Quiver q = testsupport::random_quiver(rng);
    bool has_loop = false;
    for (EdgeId e = 0; e < q.num_edges(); ++e)
      if (q.is_loop(e)) has_loop = true;
    bool expect_ok = tarjan_msc(q).empty() && !has_loop;
    bool ok = true;
    try {
      top_sort(q);
    } catch (const CyclicInput&) {
      ok = false;
    }
    CHECK(ok == expect_ok);
  }
}

TEST_CASE("spanning arborescence: an arborescence maps to itself") {
  Rng rng(7004);
  for (int trial = 0; trial < 20; ++trial) {
    Quiver t = testsupport::random_arborescence(rng, 8);
    VertexId root = -1;
    for (VertexId v = 0; v < t.num_vertices(); ++v)
      if (t.in_degree(v) == 0) root = v;
    Arborescence a = spanning_arborescence(t, root);
    std::vector<EdgeId> all(t.num_edges());
    std::iota(all.begin(), all.end(), 0);
    CHECK(a.tree_edges == all);
  }
}

TEST_CASE("spanning arborescence: diamond keeps the lower edge id") {
  Quiver q = make(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  Arborescence a = spanning_arborescence(q, 0);
  CHECK(a.parent_edge[3] == 2);  // 1 -> 3 beats 2 -> 3
}

TEST_CASE("spanning arborescence: unreachable vertices are reported") {
  try {
    spanning_arborescence(make(3, {{0, 1}}), 0);
    FAIL("expected Unreachable");
  } catch (const Unreachable& e) {
    CHECK(e.vertices == std::vector<VertexId>{2});
  }
}

TEST_CASE("spanning arborescence: output satisfies the tree axioms") {
  Rng rng(7005);
  for (int trial = 0; trial < 30; ++trial) {
    Quiver q = testsupport::random_acyclic(rng, 7, 12);
    Augmentation aug = augment(q);
    Arborescence a = spanning_arborescence(aug.quiver, aug.root);
    check_arborescence(aug.quiver, a);
  }
}

TEST_CASE("induced subquiver: keep all and keep none") {
  Quiver q = make(3, {{0, 1}, {1, 2}, {2, 0}});
  InducedSubquiver all = induced_subquiver(q, std::vector<bool>{true, true, true});
  CHECK(all.quiver.num_edges() == 3);
  CHECK(all.vertex_to_parent == std::vector<VertexId>{0, 1, 2});
  InducedSubquiver none = induced_subquiver(q, std::vector<bool>{false, false, false});
  CHECK(none.quiver.num_vertices() == 0);
  CHECK(none.quiver.num_edges() == 0);
}

TEST_CASE("induced subquiver: grid row keeps a single edge") {
  // 2x2 grid: vertices (1,1)=0,(1,2)=1,(2,1)=2,(2,2)=3 with right/up edges.
  Quiver grid = make(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  std::vector<VertexId> keep{0, 1};
  InducedSubquiver sub = induced_subquiver(grid, keep);
  CHECK(sub.quiver.num_vertices() == 2);
  CHECK(sub.quiver.num_edges() == 1);
  CHECK(sub.edge_to_parent == std::vector<EdgeId>{0});
}

TEST_SUITE_END();
