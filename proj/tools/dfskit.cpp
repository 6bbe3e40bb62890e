#include <iostream>
#include <string>
#include <vector>

#include "dfskit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dfskit::run_cli(args, std::cout, std::cerr);
}
