#pragma once

namespace stokesrobin::cli {

/// Entry point for the stokesrobin tool. Exit codes: 0 ok, 1 config error,
/// 2 solver failure, 3 invariant violation.
int run(int argc, const char* const* argv);

}  // namespace stokesrobin::cli
