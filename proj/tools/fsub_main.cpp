#include <iostream>

#include "fsub/cli_runner.hpp"

int main(int argc, char** argv) {
  return finsub::run_cli(argc, argv, std::cout, std::cerr);
}
