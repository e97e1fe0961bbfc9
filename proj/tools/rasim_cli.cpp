#include <iostream>

#include "rasim/cli.hpp"

int main(int argc, char** argv) { return rasim::run_cli(argc, argv, std::cout, std::cerr); }
