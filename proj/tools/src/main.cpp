#include <iostream>

#include "droplet_cli/cli.hpp"

int main(int argc, char** argv) { return droplet::cli::parse_and_run(argc, argv, std::cout, std::cerr); }
