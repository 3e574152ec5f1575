#pragma once

#include <iosfwd>

namespace bbsoc {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotMet = 2;

/// Command-line entry point: `solve`, `list` and `verify`.
/// Returns 0 when converged (or all checks pass), 2 when a tolerance or check
/// is not met, 1 on usage or runtime errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbsoc
