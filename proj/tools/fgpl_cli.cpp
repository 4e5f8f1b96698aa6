#include <iostream>

#include "fgpl/commands.hpp"

int main(int argc, char** argv) { return fgpl::cli::run(argc, argv, std::cout, std::cerr); }
