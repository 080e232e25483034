#include <iostream>

#include "concierge_cli/cli.hpp"

int main(int argc, char** argv) {
  return concierge::cli::run({argv + 1, argv + argc}, std::cin, std::cout, std::cerr);
}
