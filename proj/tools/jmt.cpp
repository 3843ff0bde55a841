#include <iostream>

#include "jmt/cli.hpp"

int main(int argc, char** argv) { return jmt::run_cli(argc, argv, std::cout, std::cerr); }
