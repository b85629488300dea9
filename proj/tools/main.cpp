#include <iostream>

#include "dcaa/cli.hpp"

int main(int argc, char** argv) { return dcaa::run_cli({argv + 1, argv + argc}, std::cout, std::cerr); }
