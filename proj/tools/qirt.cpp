#include <iostream>

#include "qirt/cli.hpp"

int main(int argc, char** argv) { return qirt::cli::run(argc, argv, std::cout, std::cerr); }
