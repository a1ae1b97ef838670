#include <iostream>

#include "fkpam/cli.hpp"

int main(int argc, char** argv) { return fkpam::run_cli(argc, argv, std::cout, std::cerr); }
