#include <iostream>

#include "lambdaband/cli.hpp"

int main(int argc, char** argv) { return lambdaband::run_cli(argc, argv, std::cout, std::cerr); }
