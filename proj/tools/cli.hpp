#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lsq::cli {

// Entry point behind the `lsq` executable. Returns the process exit code:
// 0 success, 1 runtime or data error, 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& log);

} // namespace lsq::cli
