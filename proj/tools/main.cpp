#include <iostream>
#include <string>
#include <vector>

#include "matblow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return matblow::cli::run(args, std::cout, std::cerr);
}
