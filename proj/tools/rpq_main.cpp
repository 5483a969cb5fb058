#include <iostream>
#include <string>
#include <vector>

#include "rpq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rpq::cli_main(args, std::cout, std::cerr);
}
