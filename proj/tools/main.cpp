#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return hcmm::cli::run_cli(argc, argv, std::cout, std::cerr); }
