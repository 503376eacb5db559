#include "virial_geo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return vgeo::cli::main_entry(argc, argv, std::cout, std::cerr); }
