#pragma once

#include <string>
#include <vector>

namespace statedpref::cli {

//! Exit codes: 0 success, 1 validation/configuration error, 2 estimation failure.
int run(const std::vector<std::string>& args);

} // namespace statedpref::cli
