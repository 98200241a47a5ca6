#include <cstdio>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const ellcert::cli::CommandOutcome out = ellcert::cli::run(args);
  if (!out.summary.empty())
    std::fputs(out.summary.c_str(), out.exit_code == 0 ? stdout : stderr);
  return out.exit_code;
}
