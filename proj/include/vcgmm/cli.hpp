#pragma once

#include <string>
#include <vector>

namespace vcgmm {

// Entry point behind the vcgmm binary; args exclude the program name.
// Exit codes: 0 success, 1 configuration/usage error, 2 data error,
// 3 numerical abort.
int main_cli(std::vector<std::string> args);

}  // namespace vcgmm
