#pragma once

#include <string>
#include <vector>

namespace ellcert::cli {

// Exit codes: 0 success, 1 input validation failure, 2 solver or
// certification failure (including I/O on artifact paths).
struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> artifacts;  // files written
  std::string summary;                 // human-readable report
};

// Subcommands:
//   check <file> [--ro r]
//   certify <file> [--json out] [--ro r]
//   solve <file> --x0 v1,...,vn [--trace out.csv] [--ro r]
//   simulate <file> --x0 ... --steps K [--plant A.csv,B.csv] [--out traj.csv]
//            [--T dt] [--ro r]
CommandOutcome run(const std::vector<std::string>& args);

}  // namespace ellcert::cli
