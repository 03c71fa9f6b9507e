#include <iostream>
#include <string>
#include <vector>

#include "border_forge/cli.hpp"

int main(int argc, char** argv) {
  border_forge::configure_logging();
  const std::vector<std::string> args(argv + 1, argv + argc);
  return border_forge::run_cli(args, std::cout, std::cerr);
}
