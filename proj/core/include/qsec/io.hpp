#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsec/sections.hpp"

namespace qsec {

/// A quiver with vertex labels, per-vertex dimensions, and optional edge
/// matrices. Maps may be missing only for files fed to the learn command.
struct ProblemFile {
  std::vector<std::string> labels;
  std::vector<int> dims;
  Quiver quiver;
  std::vector<std::optional<LinMap>> maps;
  std::optional<double> tol;

  bool complete() const;
  /// Throws ShapeMismatch when some edge has no matrix.
  Representation representation() const;
  int vertex_by_label(const std::string& name) const;  // -1 when absent
};

ProblemFile load_problem(const std::string& path);
ProblemFile parse_problem(const std::string& text, const std::string& origin);
std::string problem_to_text(const ProblemFile& p);

/// Restriction to the induced subquiver on the listed labels; maps carry over.
ProblemFile restrict_problem(const ProblemFile& p,
                             const std::vector<std::string>& keep_labels);

/// Plain CSV, one sample per row, columns ordered by vertex then coordinate.
/// Blank lines and lines starting with '#' are skipped.
Eigen::MatrixXd load_csv(const std::string& path);
Eigen::MatrixXd parse_csv(const std::string& text, const std::string& origin);

/// Machine-readable result of a CLI command. Serializes to canonical JSON;
/// parse(serialize()) reproduces the serialization byte for byte.
struct ResultReport {
  struct Block {
    std::string label;
    int offset = 0;
    int size = 0;
  };

  std::string command;
  double tol = 0.0;
  int total_dim = 0;
  int section_dim = -1;  // -1 when not applicable
  std::vector<Block> blocks;
  Eigen::MatrixXd embedding;   // empty when absent
  Eigen::VectorXd eigenvalues; // empty when absent
  Eigen::MatrixXd directions;  // empty when absent
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> residuals;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<std::string> warnings;
  std::string problem_text;  // embedded problem file (learn output)

  std::string serialize() const;
  static ResultReport parse(const std::string& text);
  void print_table(std::ostream& os) const;
};

}  // namespace qsec
