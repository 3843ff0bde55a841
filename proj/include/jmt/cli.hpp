#pragma once

#include <iosfwd>

namespace jmt {

// Entry point of the `jmt` tool. Returns 0 on success, 2 for usage errors
// (bad flags, missing files, task/dataset mismatch) and 1 for runtime
// failures.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace jmt
