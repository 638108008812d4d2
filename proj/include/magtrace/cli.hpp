#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magtrace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitUsage = 64;

inline constexpr char const* kReportVersion = "magtrace-report/1";

/// Runs one command line (without the program name). The report goes to `out`
/// unless --out names a file; diagnostics and wall time go to `err`.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace magtrace::cli
