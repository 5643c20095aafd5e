#include <iostream>

#include "bulkresv/cli.hpp"

int main(int argc, char** argv) { return bulkresv::run_cli(argc, argv, std::cout, std::cerr); }
