#include <iostream>

#include "pqspectra/cli.hpp"

int main(int argc, char** argv) { return pqs::cli::run(argc, argv, std::cerr); }
