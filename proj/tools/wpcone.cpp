#include <iostream>

#include "wpcone/cli.hpp"

int main(int argc, char** argv) { return wpcone::cli::run(argc, argv, std::cout, std::cerr); }
