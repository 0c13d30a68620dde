#include <iostream>
#include <string>
#include <vector>

#include "kstep/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kstep::cli_dispatch(args, std::cout, std::cerr);
}
