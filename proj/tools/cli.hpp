#pragma once

#include <iosfwd>

namespace hcmm::cli {

// Exit codes: 0 success, 1 failed check (VERIFY_FAIL / decode failure),
// 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hcmm::cli
