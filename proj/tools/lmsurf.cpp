#include <iostream>

#include "lmsurf/cli.hpp"

int main(int argc, char** argv) { return lmsurf::run_cli(argc, argv, std::cout, std::cerr); }
