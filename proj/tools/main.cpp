#include <iostream>

#include "bbsoc/cli.hpp"

int main(int argc, char** argv) { return bbsoc::run_cli(argc, argv, std::cout, std::cerr); }
