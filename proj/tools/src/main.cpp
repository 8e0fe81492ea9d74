#include <iostream>

#include "intsys/cli/commands.hpp"

int main(int argc, char** argv) { return intsys::cli::run_cli(argc, argv, std::cout, std::cerr); }
