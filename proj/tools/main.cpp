#include <iostream>
#include <string>
#include <vector>

#include "ecsense/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ecsense::cli::main_entry(args, std::cout, std::cerr);
}
