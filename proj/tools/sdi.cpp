#include <iostream>

#include "sdi/cli.hpp"

int main(int argc, char** argv) { return sdi::run_cli(argc, argv, std::cout, std::cerr); }
