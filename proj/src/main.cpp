#include <iostream>

#include "rugtrace/cli.hpp"

int main(int argc, char** argv) {
    return rugtrace::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
