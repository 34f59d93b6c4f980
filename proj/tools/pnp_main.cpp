#include <iostream>

#include "pnp/harness/cli.hpp"

int main(int argc, char** argv) {
  return pnp::harness::run_cli(argc, argv, std::cout, std::cerr);
}
