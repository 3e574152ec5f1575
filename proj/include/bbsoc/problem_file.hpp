#pragma once

// Problems described in JSON with symbolic expressions; the format is
// documented in docs/problem_format.md.

#include <string>
#include <string_view>

#include "bbsoc/ocp.hpp"

namespace bbsoc {

/// Throws ErrorCode::kParse on malformed JSON, unknown keys, bad names or
/// expressions, and ErrorCode::kInvalidArgument if the problem is inconsistent.
OcpDefinition parse_problem(std::string_view json_text);

/// Throws ErrorCode::kIo if the file cannot be read.
OcpDefinition load_problem_file(const std::string& path);

/// A built-in problem name, otherwise a path to a problem file.
OcpDefinition resolve_problem(const std::string& name_or_path);

}  // namespace bbsoc
