#include <iostream>

#include "srdp/cli.hpp"

int main(int argc, char** argv) { return srdp::cli::run(argc, argv, std::cout, std::cerr); }
