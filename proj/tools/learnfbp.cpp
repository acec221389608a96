#include <iostream>
#include <string>
#include <vector>

#include "learnfbp/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return learnfbp::run_cli(args, std::cout, std::cerr);
}
