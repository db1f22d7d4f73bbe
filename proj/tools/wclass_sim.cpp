#include <iostream>

#include "wclass/cli.hpp"

int main(int argc, char** argv) { return wclass::cli::main_entry(argc, argv, std::cout, std::cerr); }
