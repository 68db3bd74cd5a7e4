#include "qsec/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace qsec {

using nlohmann::json;

bool ProblemFile::complete() const {
  for (const auto& m : maps)
    if (!m) return false;
  return true;
}

Representation ProblemFile::representation() const {
  Representation rep;
  rep.dims = dims;
  for (size_t e = 0; e < maps.size(); ++e) {
    if (!maps[e])
      throw ShapeMismatch("edge " + std::to_string(e) +
                          " has no matrix; only the learn command accepts incomplete files");
    rep.maps.push_back(*maps[e]);
  }
  rep.validate(quiver);
  return rep;
}

int ProblemFile::vertex_by_label(const std::string& name) const {
  for (size_t v = 0; v < labels.size(); ++v)
    if (labels[v] == name) return static_cast<int>(v);
  return -1;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ParseError(origin + ": " + where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& origin,
                    const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(origin, where, std::string("missing field '") + key + "'");
  return *it;
}

int require_int(const json& j, const char* key, const std::string& origin,
                const std::string& where) {
  const json& v = require(j, key, origin, where);
  if (!v.is_number_integer())
    fail(origin, where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string require_string(const json& j, const char* key, const std::string& origin,
                           const std::string& where) {
  const json& v = require(j, key, origin, where);
  if (!v.is_string()) fail(origin, where + "." + key, "expected a string");
  return v.get<std::string>();
}

LinMap parse_matrix(const json& j, const std::string& origin,
                    const std::string& where) {
  if (!j.is_object()) fail(origin, where, "expected an object with rows/cols/data");
  int rows = require_int(j, "rows", origin, where);
  int cols = require_int(j, "cols", origin, where);
  if (rows < 0 || cols < 0) fail(origin, where, "negative matrix shape");
  const json& data = require(j, "data", origin, where);
  if (!data.is_array()) fail(origin, where + ".data", "expected an array");
  if (static_cast<int>(data.size()) != rows * cols)
    throw ShapeMismatch(origin + ": " + where + ": data has " +
                        std::to_string(data.size()) + " entries, expected " +
                        std::to_string(rows * cols));
  LinMap m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) {
      const json& cell = data[i * cols + c];
      if (!cell.is_number())
        fail(origin, where + ".data[" + std::to_string(i * cols + c) + "]",
             "expected a number");
      double value = cell.get<double>();
      if (!std::isfinite(value))
        fail(origin, where + ".data[" + std::to_string(i * cols + c) + "]",
             "non-finite entry");
      m(i, c) = value;
    }
  return m;
}

json matrix_to_json(const LinMap& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

LinMap matrix_from_json(const json& j, const std::string& origin,
                        const std::string& where) {
  return parse_matrix(j, origin, where);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object()) fail(origin, "document", "expected a JSON object");

  ProblemFile p;
  const json& vertices = require(j, "vertices", origin, "document");
  if (!vertices.is_array()) fail(origin, "vertices", "expected an array");
  for (size_t i = 0; i < vertices.size(); ++i) {
    std::string where = "vertices[" + std::to_string(i) + "]";
    std::string name = require_string(vertices[i], "name", origin, where);
    int dim = require_int(vertices[i], "dim", origin, where);
    if (dim < 0) fail(origin, where + ".dim", "negative dimension");
    if (p.vertex_by_label(name) >= 0)
      fail(origin, where + ".name", "duplicate vertex label '" + name + "'");
    p.labels.push_back(std::move(name));
    p.dims.push_back(dim);
  }

  std::vector<Edge> edges;
  const json& edge_list = require(j, "edges", origin, "document");
  if (!edge_list.is_array()) fail(origin, "edges", "expected an array");
  for (size_t i = 0; i < edge_list.size(); ++i) {
    std::string where = "edges[" + std::to_string(i) + "]";
    std::string from = require_string(edge_list[i], "from", origin, where);
    std::string to = require_string(edge_list[i], "to", origin, where);
    int s = p.vertex_by_label(from);
    int t = p.vertex_by_label(to);
    if (s < 0) fail(origin, where + ".from", "unknown vertex label '" + from + "'");
    if (t < 0) fail(origin, where + ".to", "unknown vertex label '" + to + "'");
    edges.push_back(Edge{s, t});
    auto it = edge_list[i].find("map");
    if (it == edge_list[i].end() || it->is_null()) {
      p.maps.emplace_back();
    } else {
      LinMap m = parse_matrix(*it, origin, where + ".map");
      if (m.rows() != p.dims[t] || m.cols() != p.dims[s])
        throw ShapeMismatch(origin + ": " + where + ".map: shape " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            " does not match dims " + std::to_string(p.dims[t]) + "x" +
                            std::to_string(p.dims[s]));
      p.maps.emplace_back(std::move(m));
    }
  }
  p.quiver = Quiver(static_cast<int>(p.labels.size()), std::move(edges));

  if (auto it = j.find("tol"); it != j.end() && !it->is_null()) {
    if (!it->is_number() || it->get<double>() <= 0)
      fail(origin, "tol", "expected a positive number");
    p.tol = it->get<double>();
  }
  return p;
}

ProblemFile load_problem(const std::string& path) {
  return parse_problem(read_file(path), path);
}

std::string problem_to_text(const ProblemFile& p) {
  json vertices = json::array();
  for (size_t v = 0; v < p.labels.size(); ++v)
    vertices.push_back(json{{"name", p.labels[v]}, {"dim", p.dims[v]}});
  json edges = json::array();
  for (int e = 0; e < p.quiver.num_edges(); ++e) {
    json entry{{"from", p.labels[p.quiver.source(e)]},
               {"to", p.labels[p.quiver.target(e)]}};
    if (p.maps[e]) entry["map"] = matrix_to_json(*p.maps[e]);
    edges.push_back(std::move(entry));
  }
  json j{{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
  if (p.tol) j["tol"] = *p.tol;
  return j.dump(2) + "\n";
}

ProblemFile restrict_problem(const ProblemFile& p,
                             const std::vector<std::string>& keep_labels) {
  std::vector<VertexId> keep;
  for (const std::string& name : keep_labels) {
    int v = p.vertex_by_label(name);
    if (v < 0) throw ParseError("--restrict: unknown vertex label '" + name + "'");
    keep.push_back(v);
  }
  InducedSubquiver sub = induced_subquiver(p.quiver, keep);
  ProblemFile out;
  out.quiver = sub.quiver;
  out.tol = p.tol;
  for (VertexId v : sub.vertex_to_parent) {
    out.labels.push_back(p.labels[v]);
    out.dims.push_back(p.dims[v]);
  }
  for (EdgeId e : sub.edge_to_parent) out.maps.push_back(p.maps[e]);
  return out;
}

Eigen::MatrixXd parse_csv(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::string cell;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      try {
        size_t used = 0;
        double value = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r'))
          ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(value)) throw std::invalid_argument("non-finite");
        row.push_back(value);
      } catch (const std::exception&) {
        throw ParseError(origin + ":" + std::to_string(lineno) +
                         ": cannot parse value '" + cell + "'");
      }
    }
    if (row.empty())
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty row");
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  return m;
}

Eigen::MatrixXd load_csv(const std::string& path) {
  return parse_csv(read_file(path), path);
}

namespace {

json pairs_to_json(const std::vector<std::pair<std::string, double>>& pairs) {
  json out = json::array();
  for (const auto& [k, v] : pairs) out.push_back(json::array({k, v}));
  return out;
}

std::vector<std::pair<std::string, double>> pairs_from_json(const json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const json& item : j)
    out.emplace_back(item[0].get<std::string>(), item[1].get<double>());
  return out;
}

}  // namespace

std::string ResultReport::serialize() const {
  json j;
  j["command"] = command;
  j["tol"] = tol;
  j["total_dim"] = total_dim;
  if (section_dim >= 0) j["section_dim"] = section_dim;
  if (!blocks.empty()) {
    json arr = json::array();
    for (const Block& b : blocks)
      arr.push_back(json{{"label", b.label}, {"offset", b.offset}, {"size", b.size}});
    j["blocks"] = std::move(arr);
  }
  if (embedding.size() > 0) j["embedding"] = matrix_to_json(embedding);
  if (eigenvalues.size() > 0) j["eigenvalues"] = vector_to_json(eigenvalues);
  if (directions.size() > 0) j["directions"] = matrix_to_json(directions);
  if (!metrics.empty()) j["metrics"] = pairs_to_json(metrics);
  if (!residuals.empty()) j["residuals"] = pairs_to_json(residuals);
  if (!timings_ms.empty()) j["timings_ms"] = pairs_to_json(timings_ms);
  if (!provenance.empty()) {
    json arr = json::array();
    for (const auto& [k, v] : provenance) arr.push_back(json::array({k, v}));
    j["provenance"] = std::move(arr);
  }
  if (!warnings.empty()) j["warnings"] = warnings;
  if (!problem_text.empty()) j["problem"] = json::parse(problem_text);
  return j.dump(2) + "\n";
}

ResultReport ResultReport::parse(const std::string& text) {
  json j = json::parse(text);
  ResultReport r;
  r.command = j.at("command").get<std::string>();
  r.tol = j.at("tol").get<double>();
  r.total_dim = j.at("total_dim").get<int>();
  if (j.contains("section_dim")) r.section_dim = j["section_dim"].get<int>();
  if (j.contains("blocks"))
    for (const json& b : j["blocks"])
      r.blocks.push_back(Block{b.at("label").get<std::string>(),
                               b.at("offset").get<int>(), b.at("size").get<int>()});
  if (j.contains("embedding"))
    r.embedding = matrix_from_json(j["embedding"], "report", "embedding");
  if (j.contains("eigenvalues")) {
    const json& arr = j["eigenvalues"];
    r.eigenvalues.resize(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) r.eigenvalues(i) = arr[i].get<double>();
  }
  if (j.contains("directions"))
    r.directions = matrix_from_json(j["directions"], "report", "directions");
  if (j.contains("metrics")) r.metrics = pairs_from_json(j["metrics"]);
  if (j.contains("residuals")) r.residuals = pairs_from_json(j["residuals"]);
  if (j.contains("timings_ms")) r.timings_ms = pairs_from_json(j["timings_ms"]);
  if (j.contains("provenance"))
    for (const json& item : j["provenance"])
      r.provenance.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
  if (j.contains("warnings"))
    r.warnings = j["warnings"].get<std::vector<std::string>>();
  if (j.contains("problem")) r.problem_text = j["problem"].dump(2) + "\n";
  return r;
}

void ResultReport::print_table(std::ostream& os) const {
  os << "command: " << command << "\n";
  os << "tolerance: " << tol << "\n";
  os << "total dimension: " << total_dim << "\n";
  if (section_dim >= 0) os << "section dimension: " << section_dim << "\n";
  if (!blocks.empty()) {
    os << "blocks (label offset size):\n";
    for (const Block& b : blocks)
      os << "  " << b.label << " " << b.offset << " " << b.size << "\n";
  }
  if (eigenvalues.size() > 0) {
    os << "eigenvalues:";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) os << " " << eigenvalues(i);
    os << "\n";
  }
  auto print_pairs = [&os](const char* title,
                           const std::vector<std::pair<std::string, double>>& pairs) {
    if (pairs.empty()) return;
    os << title << ":\n";
    for (const auto& [k, v] : pairs) os << "  " << k << ": " << v << "\n";
  };
  print_pairs("metrics", metrics);
  print_pairs("residuals", residuals);
  print_pairs("timings (ms)", timings_ms);
  if (!provenance.empty()) {
    os << "provenance:\n";
    for (const auto& [k, v] : provenance) os << "  " << k << ": " << v << "\n";
  }
  for (const std::string& w : warnings) os << "warning: " << w << "\n";
  if (!problem_text.empty()) os << "problem file:\n" << problem_text;
}

}  // namespace qsec
