#include <string>
#include <vector>

#include "vcgmm/cli.hpp"

int main(int argc, char** argv) {
    return vcgmm::main_cli(std::vector<std::string>(argv + 1, argv + argc));
}
