#include <iostream>

#include "pinchlab/cli.hpp"

int main(int argc, char** argv) { return pinchlab::run_cli(argc, argv, std::cout, std::cerr); }
