#include <iostream>
#include <string>
#include <vector>

#include "gcpbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return gcpbench::cli::run(args, std::cout, std::cerr);
}
