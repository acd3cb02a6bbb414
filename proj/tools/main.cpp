#include <iostream>

#include "harness.hpp"

int main(int argc, char** argv) { return wfreg::cli::run(argc, argv, std::cout, std::cerr); }
