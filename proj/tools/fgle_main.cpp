#include "fgle/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fgle::run_cli(argc, argv, std::cout, std::cerr); }
