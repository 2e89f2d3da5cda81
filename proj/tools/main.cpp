#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) { return kof::cli::run_cli(argc, argv, std::cout, std::cerr); }
