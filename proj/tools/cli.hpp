#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfldp::cli {

// Parses and runs one subcommand. Returns 0 on success, 1 on domain errors,
// 2 on usage errors; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfldp::cli
