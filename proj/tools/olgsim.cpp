#include "../src/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return olg::cli::run(argc, argv, std::cout, std::cerr);
}
