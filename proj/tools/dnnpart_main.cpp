#include <iostream>
#include <string>
#include <vector>

#include "dnnpart/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dnnpart::run_cli(args, std::cout, std::cerr);
}
