#include <iostream>

#include "hetheat/cli.hpp"

int main(int argc, char** argv) { return hetheat::run_cli(argc, argv, std::cout, std::cerr); }
