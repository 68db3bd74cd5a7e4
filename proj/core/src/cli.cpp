#include "qsec/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>

#include <CLI11.hpp>

#include "qsec/io.hpp"
#include "qsec/learn.hpp"
#include "qsec/qpca.hpp"
#include "qsec/sections.hpp"

namespace qsec::cli {

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <typename F>
double timed_ms(F&& body) {
  double t0 = now_ms();
  body();
  return now_ms() - t0;
}

// Applies --tol / QSEC_TOL / per-file tolerance for the scope of one command.
struct TolGuard {
  explicit TolGuard(double tol) : previous(global_rel_tol()) {
    if (tol > 0) set_global_rel_tol(tol);
  }
  ~TolGuard() { set_global_rel_tol(previous); }
  double previous;
};

struct CommonOpts {
  std::string problem_path;
  double tol = -1.0;
  bool json = false;
  std::vector<std::string> restrict_labels;
};

ProblemFile load_restricted(const CommonOpts& opts) {
  ProblemFile p = load_problem(opts.problem_path);
  if (!opts.restrict_labels.empty()) p = restrict_problem(p, opts.restrict_labels);
  return p;
}

double effective_tol(const CommonOpts& opts, const ProblemFile& p) {
  if (opts.tol > 0) return opts.tol;
  if (p.tol) return *p.tol;
  return -1.0;
}

void fill_blocks(ResultReport& report, const ProblemFile& p) {
  int offset = 0;
  for (size_t v = 0; v < p.labels.size(); ++v) {
    report.blocks.push_back(ResultReport::Block{p.labels[v], offset, p.dims[v]});
    offset += p.dims[v];
  }
  report.total_dim = offset;
}

void emit(const ResultReport& report, bool as_json, std::ostream& out) {
  if (as_json)
    out << report.serialize();
  else
    report.print_table(out);
}

std::vector<std::pair<std::string, std::string>> provenance_entries(
    const SectionSpace& space) {
  std::vector<std::pair<std::string, std::string>> out;
  auto join = [](const std::vector<int>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i)
      s += (i ? "," : "") + std::to_string(xs[i]);
    return s.empty() ? std::string("-") : s;
  };
  for (const auto& scc : space.provenance.scc)
    out.emplace_back("scc root " + std::to_string(scc.root),
                     std::to_string(scc.ear_count) + " ears, terminal edges " +
                         join(scc.terminal_edges));
  out.emplace_back("removed edges", join(space.provenance.removed_edges));
  out.emplace_back("tree edges", join(space.provenance.tree_edges));
  return out;
}

int cmd_sections(const CommonOpts& opts, std::ostream& out) {
  ProblemFile p = load_restricted(opts);
  TolGuard guard(effective_tol(opts, p));
  Representation rep = p.representation();

  SectionsResult result;
  double elapsed = timed_ms([&] { result = sections(p.quiver, rep); });

  ResultReport report;
  report.command = "sections";
  report.tol = result.space.tol;
  fill_blocks(report, p);
  report.section_dim = result.space.section_dim;
  report.embedding = result.space.embedding;
  report.metrics.emplace_back("reduced_edges", result.trace.acyclic.quiver.num_edges());
  report.metrics.emplace_back("removed_edges",
                              static_cast<double>(result.trace.acyclic.removed_edges.size()));
  report.metrics.emplace_back("tree_vertices",
                              result.trace.arboreal.tree_quiver.num_vertices());
  report.metrics.emplace_back("compatibility_residual",
                              result.space.max_compatibility_residual);
  report.timings_ms.emplace_back("sections", elapsed);
  report.provenance = provenance_entries(result.space);
  emit(report, opts.json, out);
  return kExitOk;
}

int cmd_pca(const CommonOpts& opts, const std::string& data_path, int r,
            bool no_center, bool ordinary, std::ostream& out, std::ostream& err) {
  ProblemFile p = load_restricted(opts);
  TolGuard guard(effective_tol(opts, p));

  Dataset data{load_csv(data_path), false};
  int total = 0;
  for (int d : p.dims) total += d;
  if (!opts.restrict_labels.empty() && data.width() != total) {
    throw WidthMismatch(
        "data width " + std::to_string(data.width()) +
        " does not match the restricted problem; slice the columns to match");
  }
  if (data.width() != total)
    throw WidthMismatch("data width " + std::to_string(data.width()) +
                        " does not match total dimension " + std::to_string(total));
  if (no_center)
    data.assert_centred();
  else
    data.centre();

  ResultReport report;
  report.command = ordinary ? "pca --ordinary" : "pca";
  fill_blocks(report, p);
  report.tol = rank_rel_tol(total, total);

  if (ordinary) {
    EigenPairs pairs = ordinary_pca(covariance(data), r);
    report.eigenvalues = pairs.eigenvalues;
    report.directions = pairs.directions;
    for (size_t i = 0; i < pairs.tie_with_next.size(); ++i)
      if (pairs.tie_with_next[i])
        report.warnings.push_back("eigenvalue " + std::to_string(i + 1) +
                                  " ties the next one; components are not unique");
    emit(report, opts.json, out);
    return kExitOk;
  }

  Representation rep = p.representation();
  SectionsResult sec;
  double sec_ms = timed_ms([&] { sec = sections(p.quiver, rep); });
  report.section_dim = sec.space.section_dim;
  if (sec.space.section_dim == 0) {
    err << "error: the space of sections is trivial (d = 0); restrict to a "
           "subquiver with --restrict to recover usable components\n";
    return kExitTrivial;
  }
  if (r > sec.space.section_dim) {
    err << "error: requested " << r << " components but the space of sections has dimension "
        << sec.space.section_dim << "\n";
    return kExitUsage;
  }

  QuiverPCs pcs;
  double pca_ms = timed_ms([&] { pcs = quiver_pca(data, sec.space, r); });
  report.eigenvalues = pcs.eigenvalues;
  report.directions = pcs.directions;
  report.metrics.emplace_back("achieved_trace", pcs.achieved_trace);
  report.metrics.emplace_back("b_condition", pcs.b_condition);
  report.timings_ms.emplace_back("sections", sec_ms);
  report.timings_ms.emplace_back("pca", pca_ms);
  report.provenance = provenance_entries(sec.space);
  for (size_t i = 0; i < pcs.tie_with_next.size(); ++i)
    if (pcs.tie_with_next[i])
      report.warnings.push_back("eigenvalue " + std::to_string(i + 1) +
                                " ties the next one; components are not unique");
  emit(report, opts.json, out);
  return kExitOk;
}

int cmd_learn(const CommonOpts& opts, const std::string& data_path, bool no_center,
              const std::string& out_path, std::ostream& out) {
  ProblemFile p = load_restricted(opts);
  TolGuard guard(effective_tol(opts, p));

  Dataset data{load_csv(data_path), false};
  if (no_center)
    data.assert_centred();
  else
    data.centre();

  EdgeFit fit = fit_edge_maps(p.quiver, VertexData::slice(data, p.dims));

  ProblemFile learned = p;
  for (int e = 0; e < p.quiver.num_edges(); ++e) learned.maps[e] = fit.rep.maps[e];

  ResultReport report;
  report.command = "learn";
  report.tol = rank_rel_tol(data.width(), data.width());
  fill_blocks(report, p);
  for (int e = 0; e < p.quiver.num_edges(); ++e)
    report.residuals.emplace_back("edge " + std::to_string(e) + " (" +
                                      p.labels[p.quiver.source(e)] + " -> " +
                                      p.labels[p.quiver.target(e)] + ")",
                                  fit.residuals(e));
  report.problem_text = problem_to_text(learned);
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    if (!file) throw ParseError(out_path + ": cannot open for writing");
    file << report.problem_text;
  }
  emit(report, opts.json, out);
  return kExitOk;
}

int cmd_check(const CommonOpts& opts, bool bench, std::ostream& out,
              std::ostream& err) {
  TolGuard guard(opts.tol);

  ResultReport report;
  report.command = bench ? "check --bench" : "check";
  report.tol = rank_rel_tol(1, 1);

  if (bench) {
    bool all_match = true;
    for (int size : {10, 20, 40, 80}) {
      auto [q, rep] = random_sparse_instance(0xC0FFEE + size, size, 4);
      SectionsResult pipeline;
      Subspace naive;
      double t_pipe = 1e300, t_naive = 1e300;
      for (int round = 0; round < 3; ++round) {
        t_pipe = std::min(t_pipe, timed_ms([&] { pipeline = sections(q, rep); }));
        t_naive = std::min(t_naive, timed_ms([&] { naive = naive_sections(q, rep); }));
      }
      bool match = pipeline.space.section_dim == naive.dim();
      all_match = all_match && match;
      std::string tag = "n_V=" + std::to_string(size);
      report.metrics.emplace_back(tag + " pipeline_ms", t_pipe);
      report.metrics.emplace_back(tag + " naive_ms", t_naive);
      report.metrics.emplace_back(tag + " speedup", t_naive / t_pipe);
      report.metrics.emplace_back(tag + " d", pipeline.space.section_dim);
    }
    emit(report, opts.json, out);
    if (!all_match) {
      err << "error: pipeline and naive dimensions disagree on the generated family\n";
      return kExitFailure;
    }
    return kExitOk;
  }

  ProblemFile p = load_restricted(opts);
  TolGuard file_guard(effective_tol(opts, p));
  Representation rep = p.representation();
  fill_blocks(report, p);

  SectionsResult pipeline;
  Subspace naive;
  double t_pipe = timed_ms([&] { pipeline = sections(p.quiver, rep); });
  double t_naive = timed_ms([&] { naive = naive_sections(p.quiver, rep); });

  Subspace pipeline_space = Subspace::span_of(pipeline.space.embedding);
  double distance = pipeline_space.dim() == naive.dim()
                        ? principal_angle_distance(pipeline_space, naive)
                        : std::numeric_limits<double>::infinity();

  report.section_dim = pipeline.space.section_dim;
  report.tol = pipeline.space.tol;
  report.metrics.emplace_back("pipeline_dim", pipeline.space.section_dim);
  report.metrics.emplace_back("naive_dim", naive.dim());
  report.metrics.emplace_back("subspace_distance", distance);
  report.metrics.emplace_back("speedup", t_naive / std::max(t_pipe, 1e-9));
  report.timings_ms.emplace_back("pipeline", t_pipe);
  report.timings_ms.emplace_back("naive", t_naive);
  emit(report, opts.json, out);

  if (!(distance <= 1e-8)) {
    err << "error: pipeline and naive section spaces disagree (distance "
        << distance << ")\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_bound(const CommonOpts& opts, bool verify, std::ostream& out) {
  ProblemFile p = load_restricted(opts);
  TolGuard guard(effective_tol(opts, p));
  Representation rep = p.representation();

  std::int64_t bound = dimension_lower_bound(p.quiver, rep);

  ResultReport report;
  report.command = "bound";
  report.tol = rank_rel_tol(rep.total_dim(), rep.total_dim());
  fill_blocks(report, p);
  report.metrics.emplace_back("lower_bound", static_cast<double>(bound));
  if (verify) {
    SectionsResult result = sections(p.quiver, rep);
    report.section_dim = result.space.section_dim;
    report.metrics.emplace_back("section_dim", result.space.section_dim);
  }
  emit(report, opts.json, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"space-of-sections and constrained PCA for quiver representations"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string data_path, out_path;
  int r = 1;
  bool no_center = false, ordinary = false, bench = false, verify = false;

  auto add_common = [&](CLI::App* cmd, bool needs_problem = true) {
    if (needs_problem)
      cmd->add_option("problem", opts.problem_path, "problem file (JSON)")->required();
    cmd->add_option("--tol", opts.tol, "relative rank tolerance override")
        ->envname("QSEC_TOL");
    cmd->add_flag("--json", opts.json, "emit a machine-readable report");
    cmd->add_option("--restrict", opts.restrict_labels,
                    "comma-separated vertex labels; compute on the induced subquiver")
        ->delimiter(',');
  };

  CLI::App* c_sections = app.add_subcommand("sections", "compute the space of sections");
  add_common(c_sections);

  CLI::App* c_pca = app.add_subcommand("pca", "principal components constrained to the sections");
  add_common(c_pca);
  c_pca->add_option("data", data_path, "samples CSV, one row per observation")->required();
  c_pca->add_option("--r", r, "number of components")->required();
  c_pca->add_flag("--no-center", no_center, "assert the data is already mean-centred");
  c_pca->add_flag("--ordinary", ordinary, "unconstrained PCA on the same data");

  CLI::App* c_learn = app.add_subcommand("learn", "estimate edge maps by least squares");
  add_common(c_learn);
  c_learn->add_option("data", data_path, "samples CSV")->required();
  c_learn->add_flag("--no-center", no_center, "assert the data is already mean-centred");
  c_learn->add_option("--out", out_path, "write the learned problem file here");

  CLI::App* c_check = app.add_subcommand("check", "cross-check the pipeline against the naive kernel");
  c_check->add_option("problem", opts.problem_path, "problem file (JSON)");
  c_check->add_option("--tol", opts.tol, "relative rank tolerance override")
      ->envname("QSEC_TOL");
  c_check->add_flag("--json", opts.json, "emit a machine-readable report");
  c_check->add_option("--restrict", opts.restrict_labels,
                      "comma-separated vertex labels; compute on the induced subquiver")
      ->delimiter(',');
  c_check->add_flag("--bench", bench, "time a generated family instead of a file");

  CLI::App* c_bound = app.add_subcommand("bound", "lower bound on the section dimension");
  add_common(c_bound);
  c_bound->add_flag("--verify", verify, "also run the pipeline and report the true dimension");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (c_sections->parsed()) return cmd_sections(opts, out);
    if (c_pca->parsed()) return cmd_pca(opts, data_path, r, no_center, ordinary, out, err);
    if (c_learn->parsed()) return cmd_learn(opts, data_path, no_center, out_path, out);
    if (c_check->parsed()) {
      if (!bench && opts.problem_path.empty()) {
        err << "error: check needs a problem file or --bench\n";
        return kExitUsage;
      }
      return cmd_check(opts, bench, out, err);
    }
    if (c_bound->parsed()) return cmd_bound(opts, verify, out);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ZeroSections& e) {
    err << "error: " << e.what()
        << "; restrict to a subquiver with --restrict to recover usable components\n";
    return kExitTrivial;
  } catch (const ShapeMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const WidthMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const NotCentred& e) {
    err << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const CyclicInput& e) {
    err << "error: " << e.what() << " (witness edges:";
    for (int edge : e.witness_cycle) err << " " << edge;
    err << ")\n";
    return kExitShape;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace qsec::cli
