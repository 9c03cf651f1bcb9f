#include <string>
#include <vector>

#include "forlaps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return forlaps::cli::run(std::move(args));
}
