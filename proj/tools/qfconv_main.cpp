#include <iostream>

#include "qfconv/cli.hpp"

int main(int argc, char** argv) { return qfconv::run_cli(argc, argv, std::cout, std::cerr); }
