#include <iostream>

#include "dnprobe/commands.hpp"

int main(int argc, char** argv) { return dnprobe::run_cli(argc, argv, std::cout, std::cerr); }
