#include "pahomeo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pahomeo::run_cli(argc, argv, std::cout, std::cerr); }
