#include <string>
#include <vector>

#include "rosdyn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rosdyn::cli::run_cli(args);
}
