#include "soniguide/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return soniguide::run_cli(argc, argv, std::cout, std::cerr); }
