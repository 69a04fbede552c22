/// `otlin` command line tool.
#include "otlin/harness.hpp"

#include <iostream>

int main(int argc, char** argv) { return otlin::run_cli(argc, argv, std::cout, std::cerr); }
