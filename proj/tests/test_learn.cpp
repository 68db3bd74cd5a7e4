#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qsec/learn.hpp"
#include "support/corpus.hpp"
#include "support/rational.hpp"

using namespace qsec;
using namespace qsec::testsupport;

namespace {

Quiver make(int n, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<Edge> es;
  for (auto [s, t] : edges) es.push_back(Edge{s, t});
  return Quiver(n, std::move(es));
}

}  // namespace

TEST_SUITE_BEGIN("learn");

TEST_CASE("fit_edge_maps recovers a planted map from noiseless data") {
  Rng rng(300);
  InstanceOptions real;
  real.real_maps = true;
  Quiver q = make(2, {{0, 1}});
  LinMap planted = random_matrix(rng, 3, 2, real);
  LinMap xs = random_matrix(rng, 12, 2, real);  // full column rank samples

  Dataset d;
  d.samples.resize(12, 5);
  d.samples.leftCols(2) = xs;
  d.samples.rightCols(3) = xs * planted.transpose();
  d.centre();

  EdgeFit fit = fit_edge_maps(q, VertexData::slice(d, {2, 3}));
  CHECK((fit.rep.maps[0] - planted).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fit.residuals(0) <= 1e-10);
}

TEST_CASE("fit_edge_maps: zero source block gives the zero estimate") {
  Quiver q = make(2, {{0, 1}});
  VertexData vd;
  vd.blocks.push_back(Eigen::MatrixXd::Zero(6, 2));
  vd.blocks.push_back(Eigen::MatrixXd::Ones(6, 3));
  EdgeFit fit = fit_edge_maps(q, vd);
  CHECK(fit.rep.maps[0].norm() == 0.0);
  CHECK(fit.residuals(0) == doctest::Approx(vd.blocks[1].norm()));
}

TEST_CASE("fit_edge_maps matches the normal equations when invertible") {
  Rng rng(301);
  InstanceOptions real;
  real.real_maps = true;
  Quiver q = make(2, {{0, 1}});
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd yu = random_matrix(rng, 15, 3, real);
    Eigen::MatrixXd yv = random_matrix(rng, 15, 2, real);
    VertexData vd;
    vd.blocks = {yu, yv};
    EdgeFit fit = fit_edge_maps(q, vd);
    Eigen::MatrixXd normal =
        (yu.transpose() * yu).inverse() * yu.transpose() * yv;
    CHECK((fit.rep.maps[0].transpose() - normal).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("fit_edge_maps agrees with the exact rational pseudo-inverse") {
  Rng rng(302);
  InstanceOptions ints;
  Quiver q = make(2, {{0, 1}});
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::MatrixXd yu = random_matrix(rng, 6, 3, ints);
    Eigen::MatrixXd yv = random_matrix(rng, 6, 2, ints);
    VertexData vd;
    vd.blocks = {yu, yv};
    EdgeFit fit = fit_edge_maps(q, vd);
    RatMat exact = rat_pinv(RatMat::from_double(yu)) * RatMat::from_double(yv);
    CHECK((fit.rep.maps[0].transpose() - exact.to_double()).cwiseAbs().maxCoeff() <=
          1e-9);
  }
}

TEST_CASE("fit_edge_maps is locally optimal edge by edge") {
  Rng rng(303);
  InstanceOptions real;
  real.real_maps = true;
  Quiver q = make(3, {{0, 1}, {0, 2}, {1, 2}});
  Dataset d = random_dataset(rng, 20, 2 + 3 + 2);
  VertexData vd = VertexData::slice(d, {2, 3, 2});
  EdgeFit fit = fit_edge_maps(q, vd);

  auto objective = [&](const Representation& rep) {
    double total = 0.0;
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
      double r = (vd.blocks[q.target(e)] -
                  vd.blocks[q.source(e)] * rep.maps[e].transpose())
                     .norm();
      total += r * r;
    }
    return total;
  };
  double base = objective(fit.rep);
  for (EdgeId e = 0; e < q.num_edges(); ++e) {
    for (int probe = 0; probe < 100; ++probe) {
      Representation nudged = fit.rep;
      nudged.maps[e] += 1e-3 * random_matrix(rng, nudged.maps[e].rows(),
                                             nudged.maps[e].cols(), real);
      CHECK(objective(nudged) >= base - 1e-12);
    }
  }
}

TEST_CASE("fit_edge_maps validates the block layout") {
  Quiver q = make(2, {{0, 1}});
  VertexData short_blocks;
  short_blocks.blocks = {Eigen::MatrixXd::Zero(5, 2)};
  CHECK_THROWS_AS(fit_edge_maps(q, short_blocks), WidthMismatch);

  VertexData ragged;
  ragged.blocks = {Eigen::MatrixXd::Zero(5, 2), Eigen::MatrixXd::Zero(6, 2)};
  CHECK_THROWS_AS(fit_edge_maps(q, ragged), WidthMismatch);
}

TEST_CASE("delta_blowup: unit weights reproduce the quiver") {
  Quiver q = make(3, {{0, 1}, {1, 2}, {0, 2}});
  BlowupGraph g = delta_blowup(q, {1, 1, 1});
  CHECK(g.num_nodes == 3);
  REQUIRE(g.arcs.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(g.arcs[e].src == q.source(e));
    CHECK(g.arcs[e].dst == q.target(e));
    CHECK(g.arcs[e].weight == 1.0);
  }
  CHECK_FALSE(g.single_parent);  // the sink has two incoming edges
}

TEST_CASE("delta_blowup: branching example node and arc counts") {
  // A chain into a fork: dims 1 -> 2 -> {3, 2}.
  Quiver q = make(4, {{0, 1}, {1, 2}, {1, 3}});
  BlowupGraph g = delta_blowup(q, {1, 2, 3, 2});
  CHECK(g.num_nodes == 1 + 2 + 3 + 2);
  CHECK(g.arcs.size() == 1 * 2 + 2 * 3 + 2 * 2);
  CHECK(g.single_parent);
}

TEST_CASE("delta_blowup: single edge becomes a complete bipartite bundle") {
  Quiver q = make(2, {{0, 1}});
  Rng rng(304);
  Representation rep{{2, 2}, {random_matrix(rng, 2, 2)}};
  BlowupGraph g = delta_blowup(q, {2, 2}, &rep);
  REQUIRE(g.arcs.size() == 4);
  CHECK(g.weighted);
  for (const auto& arc : g.arcs) {
    int i = arc.src - g.node_offset[0];
    int j = arc.dst - g.node_offset[1];
    CHECK(arc.weight == rep.maps[0](j, i));
  }

  std::ostringstream os;
  g.write_edge_list(os);
  int lines = 0;
  for (char c : os.str())
    if (c == '\n') ++lines;
  CHECK(lines == 4);
}

TEST_CASE("delta_blowup counts and flags on random quivers") {
  Rng rng(305);
  for (int trial = 0; trial < 25; ++trial) {
    auto [q, rep] = random_instance(rng);
    BlowupGraph g = delta_blowup(q, rep.dims, &rep);
    int nodes = 0;
    size_t arcs = 0;
    bool single = true;
    for (int v = 0; v < q.num_vertices(); ++v) {
      nodes += rep.dims[v];
      if (q.in_degree(v) > 1) single = false;
    }
    for (EdgeId e = 0; e < q.num_edges(); ++e)
      arcs += static_cast<size_t>(rep.dims[q.source(e)]) * rep.dims[q.target(e)];
    CHECK(g.num_nodes == nodes);
    CHECK(g.arcs.size() == arcs);
    CHECK(g.single_parent == single);
  }
}

TEST_CASE("delta_blowup rejects mismatched weights") {
  Quiver q = make(2, {{0, 1}});
  Rng rng(306);
  Representation rep{{2, 2}, {random_matrix(rng, 2, 2)}};
  CHECK_THROWS_AS(delta_blowup(q, {2, 3}, &rep), ShapeMismatch);
}

TEST_CASE("learn_then_pca: one-arrow pipeline reproduces the closed-form pencil") {
  Rng rng(307);
  InstanceOptions real;
  real.real_maps = true;
  const int p = 3, qdim = 2, m = 25;
  Quiver q = make(2, {{0, 1}});

  Dataset d = random_dataset(rng, m, p + qdim);
  LearnPcaResult res = learn_then_pca(q, {p, qdim}, d, 1);

  Eigen::MatrixXd yu = d.samples.leftCols(p);
  Eigen::MatrixXd yv = d.samples.rightCols(qdim);
  LinMap j = (pinv(yu) * yv).transpose();
  CHECK((res.fit.rep.maps[0] - j).cwiseAbs().maxCoeff() <= 1e-12);

  // The learned embedding is exactly [id; J].
  LinMap f(p + qdim, p);
  f << LinMap::Identity(p, p), j;
  CHECK((res.sections.space.embedding - f).cwiseAbs().maxCoeff() <= 1e-10);

  Covariance s = covariance(d);
  OneArrowPencil pen = one_arrow_pencil(split_covariance(s, p), j);
  PencilResult direct = solve_pencil(pen.a, pen.b);
  Eigen::VectorXd dir = (f * direct.eigenvectors.col(0)).normalized();
  Eigen::VectorXd got = res.pcs.directions.col(0);
  CHECK(std::min((got - dir).norm(), (got + dir).norm()) <= 1e-10);
}

TEST_CASE("learn_then_pca: planted representation is recovered exactly") {
  Rng rng(308);
  InstanceOptions real;
  real.real_maps = true;
  for (int trial = 0; trial < 10; ++trial) {
    // Equal dimensions and invertible planted maps keep every data block at
    // full column rank, which exact recovery needs.
    Quiver t = random_arborescence(rng, 5);
    const int k = 3;
    Representation planted;
    planted.dims.assign(t.num_vertices(), k);
    for (EdgeId e = 0; e < t.num_edges(); ++e)
      planted.maps.push_back(random_invertible(rng, k));
    SectionsResult truth = sections(t, planted);
    int d = truth.space.section_dim;
    REQUIRE(d >= 1);

    Dataset data = dataset_in_sections(rng, 40, truth.space);
    LearnPcaResult res = learn_then_pca(t, planted.dims, data, std::min(2, d));

    for (EdgeId e = 0; e < t.num_edges(); ++e)
      CHECK((res.fit.rep.maps[e] - planted.maps[e]).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(principal_angle_distance(
              Subspace::span_of(res.sections.space.embedding),
              Subspace::span_of(truth.space.embedding)) <= 1e-8);

    QuiverPCs expected = quiver_pca(data, truth.space, std::min(2, d));
    CHECK(principal_angle_distance(Subspace::span_of(res.pcs.directions),
                                   Subspace::span_of(expected.directions)) <= 1e-8);
  }
}

TEST_CASE("learn_then_pca: zero data yields zero maps and flagged ties") {
  Quiver q = make(2, {{0, 1}});
  Dataset zeros;
  zeros.samples = Eigen::MatrixXd::Zero(8, 4);
  LearnPcaResult res = learn_then_pca(q, {2, 2}, zeros, 1);
  CHECK(res.fit.rep.maps[0].norm() == 0.0);
  CHECK(res.pcs.eigenvalues(0) == doctest::Approx(0.0));
  REQUIRE(!res.pcs.tie_with_next.empty());
  CHECK(res.pcs.tie_with_next[0]);
}

TEST_SUITE_END();
