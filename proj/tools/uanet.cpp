#include <iostream>

#include "uanet/app/cli.hpp"

int main(int argc, char** argv) { return uanet::app::run_cli(argc, argv, std::cout, std::cerr); }
