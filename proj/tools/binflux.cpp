#include "binflux/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return binflux::run_cli(argc, argv, std::cout, std::cerr); }
