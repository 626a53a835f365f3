#pragma once

// JSON problem files and dominance certificates.
//
// Problem file:
//   {
//     "n": 3,
//     "B": 2.0,                                    // optional box half-width
//     "node_factors":  [{"var": 0, "kind": "quadratic", "q": 1, "l": -1, "constant": 0.5}, ...],
//     "edge_factors":  [{"i": 0, "j": 1, "kind": "quadratic_coupling", "c": 0.25}, ...],
//     "hyper_factors": [{"scope": [0, 1, 2], "kind": "squared_span", "c": 1, "a": [1, -1, 0]}, ...]
//   }
//
// Node kinds: quadratic {q, l, constant?}, logcosh {a, b, shift?},
//             even_quartic {c, shift?}, sum {terms: [node records without var]}.
// Edge kinds: quadratic_coupling {c}, quadratic_form {h: [[hii, hij], [hij, hjj]]},
//             logcosh_coupling {a, b}, quartic_coupling {c}.
// Hyper kinds: quadratic_form_k {h: |C| x |C| rows}, squared_span {c, a}.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "minsum/dominance.hpp"
#include "minsum/model.hpp"

namespace minsum {

/// Throws ParseError (syntax, with line number; or field, with a JSON path)
/// and ValidationError (well-formed document describing an invalid program).
Program parse_problem(std::string_view text);
Program load_problem(const std::filesystem::path& path);

nlohmann::json problem_to_json(const Program& program);
std::string dump_problem(const Program& program, int indent = 2);

nlohmann::json certificate_to_json(const DominanceCertificate& certificate);
DominanceCertificate certificate_from_json(const nlohmann::json& j);
DominanceCertificate load_certificate(const std::filesystem::path& path);

/// Parses JSON text, converting syntax errors into ParseError with a 1-based line.
nlohmann::json parse_json_document(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace minsum
