#include <iostream>
#include <string>
#include <vector>

#include "raglog/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return raglog::cli::run(args, std::cout, std::cerr);
}
