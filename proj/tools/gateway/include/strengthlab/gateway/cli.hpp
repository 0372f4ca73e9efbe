#pragma once

#include <iosfwd>

namespace strengthlab::gateway {

/// Entry point of the strengthlab command. Returns 0 on success, 2 on a usage
/// error and 1 on a domain error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace strengthlab::gateway
