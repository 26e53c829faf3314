#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace urn::cli
{

// Exit codes: 0 success (and every requested check passed), 1 a study
// failed its checks, 2 usage or runtime error.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace urn::cli
