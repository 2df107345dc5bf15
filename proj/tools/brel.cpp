#include <iostream>

#include "brel/cli.hpp"

int main(int argc, char** argv) { return brel::cli::run_cli(argc, argv, std::cout, std::cerr); }
