#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace scanopt::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kBadInput = 2,
  kNumerical = 3,
  kInfeasible = 4,
};

struct GlobalOptions {
  std::optional<std::filesystem::path> config;  // built-in defaults when absent
  std::optional<std::filesystem::path> out;     // overrides output.dir
  std::optional<std::uint64_t> seed;            // overrides seed
};

int cmd_ilc(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_optimize(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simdemo(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// Parses `scanopt <command> [--config F] [--out D] [--seed S]` and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scanopt::cli
