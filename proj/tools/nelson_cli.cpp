#include "nelson/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nelson::cli::run(argc, argv, std::cout, std::cerr); }
