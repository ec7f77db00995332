#include "gkdiff/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gkdiff::cli::run(argc, argv, std::cout, std::cerr); }
