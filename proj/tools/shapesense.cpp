#include <iostream>
#include <string>
#include <vector>

#include "shapesense/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return shapesense::cli::run(args, std::cout, std::cerr);
}
