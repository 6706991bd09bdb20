#include <iostream>

#include "metadecomp/cli.hpp"

int main(int argc, char** argv) { return metadecomp::cli::run(argc, argv, std::cout, std::cerr); }
