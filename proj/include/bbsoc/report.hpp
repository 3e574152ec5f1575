#pragma once

// Serialization of solve reports: a versioned JSON document and a flat
// trajectory CSV. Doubles are written with round-trip precision.

#include <iosfwd>
#include <string>

#include "bbsoc/driver.hpp"

namespace bbsoc {

inline constexpr int kReportSchema = 1;

/// JSON report including options, iteration records, detected structure and the final trajectory.
std::string report_json(const SolveReport& report, const SolverOptions& options, int indent = 2);

/// Columns domain, t, x1..xn, u1..um, lambda1..lambdan. The last support
/// point of each domain has no control sample and leaves those cells empty.
void write_trajectory_csv(std::ostream& out, const TrajectorySolution& sol);

/// Writes `text` to `path`; throws ErrorCode::kIo on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bbsoc
