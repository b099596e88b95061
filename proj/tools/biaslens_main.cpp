#include <iostream>
#include <string>
#include <vector>

#include "biaslens/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return biaslens::cli::run_cli(args, std::cout, std::cerr);
}
