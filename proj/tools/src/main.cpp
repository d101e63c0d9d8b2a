#include <iostream>

#include "mospa_cli/run.hpp"

int main(int argc, char** argv) { return mospa::cli::run(argc, argv, std::cerr); }
