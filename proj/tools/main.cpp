#include <iostream>

#include "leakage/cli.hpp"

int main(int argc, char** argv) { return leakage::cli::run(argc, argv, std::cout, std::cerr); }
