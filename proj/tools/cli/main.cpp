#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return kowalevski::cli::run_cli(argc, argv, std::cout, std::cerr); }
