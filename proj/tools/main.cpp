#include <iostream>

#include "ogmc/cli.hpp"

int main(int argc, char** argv) { return ogmc::cli::run(argc, argv, std::cout, std::cerr); }
