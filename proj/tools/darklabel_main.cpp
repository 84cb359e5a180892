#include <iostream>

#include "darklabel/cli.hpp"

int main(int argc, char** argv) { return darklabel::run_cli(argc, argv, std::cout, std::cerr); }
