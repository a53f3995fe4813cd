#include <iostream>

#include "divprune/cli.hpp"

int main(int argc, char** argv) { return divprune::cli::run(argc, argv, std::cout, std::cerr); }
