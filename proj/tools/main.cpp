#include <iostream>

#include "rci/cli.hpp"

int main(int argc, char** argv) { return rci::run_cli(argc, argv, std::cout, std::cerr); }
