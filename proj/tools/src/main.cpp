#include <iostream>

#include "ethlab/cli/app.hpp"

int main(int argc, char** argv) { return ethlab::cli::run_cli(argc, argv, std::cout, std::cerr); }
