#include <accessgraph/app/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
  return accessgraph::app::cli_run({argv + 1, argv + argc}, std::cout, std::cerr);
}
