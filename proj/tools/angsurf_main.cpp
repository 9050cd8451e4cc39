#include <iostream>

#include "angsurf/cli.hpp"

int main(int argc, char** argv) { return angsurf::cli::run(argc, argv, std::cout, std::cerr); }
