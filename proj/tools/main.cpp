#include <iostream>

#include "tabgls/cli.hpp"

int main(int argc, char** argv) { return tabgls::cli::run_cli(argc, argv, std::cout, std::cerr); }
