#include <iostream>

#include "tdetect/cli.hpp"

int main(int argc, char** argv) { return tdetect::cli::run(argc, argv, std::cout, std::cerr); }
