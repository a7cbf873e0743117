#pragma once

// Command-line front end for pgp-risk. `run` is the whole program minus the
// process boundary, so tests can drive it in-process.

#include <ostream>

namespace pgprisk::cli {

/// Exit codes: 0 ok, 1 verification failed, 2 configuration, 3 data, 4 numerical.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pgprisk::cli
