#include <iostream>

#include "padic/cli.hpp"

int main(int argc, char** argv) {
  return padic::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
