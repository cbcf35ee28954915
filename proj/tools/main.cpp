#include <iostream>

#include "mnar/cli.hpp"

int main(int argc, char** argv) { return mnar::run_cli(argc, argv, std::cout, std::cerr); }
