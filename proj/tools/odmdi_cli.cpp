#include <iostream>
#include <string>
#include <vector>

#include "odmdi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return odmdi::cli::run(args, std::cout, std::cerr);
}
