#include <iostream>
#include <string>
#include <vector>

#include "mirrornoise/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mirrornoise::run_cli(args, std::cout, std::cerr);
}
