#include <iostream>

#include "spinbound/commands.hpp"

int main(int argc, char** argv) { return spinbound::cli::run(argc, argv, std::cout, std::cerr); }
