#include "minsum/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "minsum/errors.hpp"

namespace minsum {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void field_error(const std::string& path, const std::string& message) {
  throw ParseError(path + ": " + message, 0, path);
}

const json& require_field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing field");
  return *it;
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require_field(obj, key, path);
  if (!v.is_number()) field_error(path + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return number(obj, key, path);
}

Index index_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require_field(obj, key, path);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    field_error(path + "." + key, "expected a non-negative integer");
  }
  return v.get<Index>();
}

std::string kind_field(const json& obj, const std::string& path) {
  const json& v = require_field(obj, "kind", path);
  if (!v.is_string()) field_error(path + ".kind", "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) field_error(path + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

Eigen::MatrixXd square_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) field_error(path, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    auto row = number_array(v[static_cast<std::size_t>(r)], rp);
    if (static_cast<Eigen::Index>(row.size()) != n) field_error(rp, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

NodeFactor parse_node(const json& rec, const std::string& path) {
  const std::string kind = kind_field(rec, path);
  if (kind == "quadratic") {
    return QuadraticNode{number(rec, "q", path), number_or(rec, "l", 0.0, path),
                         number_or(rec, "constant", 0.0, path)};
  }
  if (kind == "logcosh") {
    return LogCoshNode{number(rec, "a", path), number(rec, "b", path), number_or(rec, "shift", 0.0, path)};
  }
  if (kind == "even_quartic") {
    return EvenQuarticNode{number(rec, "c", path), number_or(rec, "shift", 0.0, path)};
  }
  if (kind == "sum") {
    const json& terms = require_field(rec, "terms", path);
    if (!terms.is_array()) field_error(path + ".terms", "expected an array");
    SumNode sum;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      sum.terms.push_back(parse_node(terms[k], path + ".terms[" + std::to_string(k) + "]"));
    }
    return sum;
  }
  field_error(path + ".kind", "unknown node factor kind '" + kind + "'");
}

EdgeFactor parse_edge(const json& rec, const std::string& path) {
  const Index i = index_field(rec, "i", path);
  const Index j = index_field(rec, "j", path);
  const std::string kind = kind_field(rec, path);
  if (kind == "quadratic_coupling") return {i, j, QuadraticCoupling{number(rec, "c", path)}};
  if (kind == "quartic_coupling") return {i, j, QuarticCoupling{number(rec, "c", path)}};
  if (kind == "logcosh_coupling") return {i, j, LogCoshCoupling{number(rec, "a", path), number(rec, "b", path)}};
  if (kind == "quadratic_form") {
    Eigen::MatrixXd h = square_matrix(require_field(rec, "h", path), path + ".h");
    if (h.rows() != 2) field_error(path + ".h", "quadratic_form needs a 2x2 block");
    if (h(0, 1) != h(1, 0)) field_error(path + ".h", "quadratic_form block must be symmetric");
    return {i, j, QuadraticForm{h(0, 0), h(0, 1), h(1, 1)}};
  }
  field_error(path + ".kind", "unknown edge factor kind '" + kind + "'");
}

HyperFactor parse_hyper(const json& rec, const std::string& path) {
  const json& scope_json = require_field(rec, "scope", path);
  if (!scope_json.is_array()) field_error(path + ".scope", "expected an array of variable indices");
  std::vector<Index> scope;
  for (std::size_t k = 0; k < scope_json.size(); ++k) {
    const json& v = scope_json[k];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      field_error(path + ".scope[" + std::to_string(k) + "]", "expected a non-negative integer");
    }
    scope.push_back(v.get<Index>());
  }
  const std::string kind = kind_field(rec, path);
  if (kind == "quadratic_form_k") {
    return {std::move(scope), QuadraticFormK{square_matrix(require_field(rec, "h", path), path + ".h")}};
  }
  if (kind == "squared_span") {
    return {std::move(scope),
            SquaredSpan{number(rec, "c", path), number_array(require_field(rec, "a", path), path + ".a")}};
  }
  field_error(path + ".kind", "unknown hyper factor kind '" + kind + "'");
}

json node_to_json(const NodeFactor& f) {
  return std::visit(overloaded{
                        [](const QuadraticNode& q) {
                          json j{{"kind", "quadratic"}, {"q", q.curvature}, {"l", q.slope}};
                          if (q.constant != 0.0) j["constant"] = q.constant;
                          return j;
                        },
                        [](const LogCoshNode& l) {
                          return json{{"kind", "logcosh"}, {"a", l.amplitude}, {"b", l.rate}, {"shift", l.shift}};
                        },
                        [](const EvenQuarticNode& e) {
                          return json{{"kind", "even_quartic"}, {"c", e.coefficient}, {"shift", e.shift}};
                        },
                        [](const SumNode& s) {
                          json terms = json::array();
                          for (const auto& t : s.terms) terms.push_back(node_to_json(t));
                          return json{{"kind", "sum"}, {"terms", terms}};
                        },
                    },
                    f.kind());
}

json edge_to_json(const EdgeFactor& e) {
  json j = std::visit(overloaded{
                          [](const QuadraticCoupling& q) { return json{{"kind", "quadratic_coupling"}, {"c", q.c}}; },
                          [](const QuarticCoupling& q) { return json{{"kind", "quartic_coupling"}, {"c", q.c}}; },
                          [](const LogCoshCoupling& l) {
                            return json{{"kind", "logcosh_coupling"}, {"a", l.amplitude}, {"b", l.rate}};
                          },
                          [](const QuadraticForm& f) {
                            return json{{"kind", "quadratic_form"},
                                        {"h", json::array({json::array({f.h_ii, f.h_ij}), json::array({f.h_ij, f.h_jj})})}};
                          },
                      },
                      e.kind());
  j["i"] = e.i();
  j["j"] = e.j();
  return j;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json hyper_to_json(const HyperFactor& h) {
  json j = std::visit(overloaded{
                          [](const QuadraticFormK& q) { return json{{"kind", "quadratic_form_k"}, {"h", matrix_to_json(q.h)}}; },
                          [](const SquaredSpan& s) { return json{{"kind", "squared_span"}, {"c", s.c}, {"a", s.weights}}; },
                      },
                      h.kind());
  j["scope"] = h.scope();
  return j;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

json parse_json_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based byte position of the failure.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const std::size_t line = line_of(text, byte);
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Program parse_problem(std::string_view text) {
  const json doc = parse_json_document(text);
  if (!doc.is_object()) field_error("$", "problem file must be a JSON object");
  const Index n = index_field(doc, "n", "$");

  std::vector<std::optional<NodeFactor>> nodes(n);
  const json& node_list = require_field(doc, "node_factors", "$");
  if (!node_list.is_array()) field_error("$.node_factors", "expected an array");
  for (std::size_t k = 0; k < node_list.size(); ++k) {
    const std::string path = "$.node_factors[" + std::to_string(k) + "]";
    const Index var = index_field(node_list[k], "var", path);
    if (var >= n) field_error(path + ".var", "variable index out of range");
    if (nodes[var]) field_error(path + ".var", "variable " + std::to_string(var) + " already has a node factor");
    nodes[var] = parse_node(node_list[k], path);
  }
  std::vector<NodeFactor> node_factors;
  node_factors.reserve(n);
  for (Index i = 0; i < n; ++i) {
    if (!nodes[i]) field_error("$.node_factors", "variable " + std::to_string(i) + " has no node factor");
    node_factors.push_back(*std::move(nodes[i]));
  }

  std::vector<EdgeFactor> edges;
  if (doc.contains("edge_factors")) {
    const json& list = doc["edge_factors"];
    if (!list.is_array()) field_error("$.edge_factors", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      edges.push_back(parse_edge(list[k], "$.edge_factors[" + std::to_string(k) + "]"));
    }
  }
  std::vector<HyperFactor> hypers;
  if (doc.contains("hyper_factors")) {
    const json& list = doc["hyper_factors"];
    if (!list.is_array()) field_error("$.hyper_factors", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      hypers.push_back(parse_hyper(list[k], "$.hyper_factors[" + std::to_string(k) + "]"));
    }
  }
  std::optional<double> bound;
  if (doc.contains("B") && !doc["B"].is_null()) bound = number(doc, "B", "$");

  return Program(std::move(node_factors), std::move(edges), std::move(hypers), bound);
}

Program load_problem(const std::filesystem::path& path) { return parse_problem(read_text_file(path)); }

json problem_to_json(const Program& program) {
  json doc;
  doc["n"] = program.size();
  json nodes = json::array();
  for (Index i = 0; i < program.size(); ++i) {
    json rec = node_to_json(program.node(i));
    rec["var"] = i;
    nodes.push_back(std::move(rec));
  }
  doc["node_factors"] = std::move(nodes);
  json edges = json::array();
  for (const auto& e : program.edges()) edges.push_back(edge_to_json(e));
  doc["edge_factors"] = std::move(edges);
  json hypers = json::array();
  for (const auto& h : program.hypers()) hypers.push_back(hyper_to_json(h));
  doc["hyper_factors"] = std::move(hypers);
  if (program.bound()) doc["B"] = *program.bound();
  return doc;
}

std::string dump_problem(const Program& program, int indent) { return problem_to_json(program).dump(indent); }

json certificate_to_json(const DominanceCertificate& c) {
  json j;
  j["lambda"] = c.lambda;
  j["w"] = c.w;
  j["M"] = c.M;
  j["K"] = c.K;
  j["method"] = to_string(c.method);
  if (c.box) {
    json box = json::array();
    for (const auto& iv : *c.box) box.push_back(json::array({iv.lo, iv.hi}));
    j["box"] = std::move(box);
  } else {
    j["box"] = nullptr;
  }
  return j;
}

DominanceCertificate certificate_from_json(const json& j) {
  DominanceCertificate c;
  c.lambda = number(j, "lambda", "$");
  c.w = number_array(require_field(j, "w", "$"), "$.w");
  c.M = number(j, "M", "$");
  c.K = number(j, "K", "$");
  const json& method = require_field(j, "method", "$");
  if (method == "exact-quadratic") {
    c.method = CertificateMethod::ExactQuadratic;
  } else if (method == "sampled-box") {
    c.method = CertificateMethod::SampledBox;
  } else {
    field_error("$.method", "expected 'exact-quadratic' or 'sampled-box'");
  }
  if (j.contains("box") && !j["box"].is_null()) {
    std::vector<Interval> box;
    const json& list = j["box"];
    if (!list.is_array()) field_error("$.box", "expected an array of [lo, hi] pairs");
    for (std::size_t k = 0; k < list.size(); ++k) {
      auto pair = number_array(list[k], "$.box[" + std::to_string(k) + "]");
      if (pair.size() != 2) field_error("$.box[" + std::to_string(k) + "]", "expected [lo, hi]");
      box.push_back({pair[0], pair[1]});
    }
    c.box = std::move(box);
  }
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) field_error("$.lambda", "must lie in (0, 1)");
  if (!(c.M > 0.0)) field_error("$.M", "must be positive");
  return c;
}

DominanceCertificate load_certificate(const std::filesystem::path& path) {
  return certificate_from_json(parse_json_document(read_text_file(path)));
}

}  // namespace minsum
