#include <vector>

#include "riemspline/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return riemspline::run_cli(args);
}
