#pragma once

#include <ostream>

namespace fgle {

// Output directory override, takes precedence over the config file but not over --out-dir.
inline constexpr const char* kOutDirEnv = "FGLE_OUT_DIR";

// fgle <soe|simulate|strong-order|fast-agreement|mlmc|mc-compare> [--config FILE] [overrides]
// Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fgle
