#include <iostream>
#include <string>
#include <vector>

#include "evhmm/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::vector<std::string> args(argv, argv + argc);
  return evhmm::run_cli(args, std::cin, std::cout, std::cerr);
}
