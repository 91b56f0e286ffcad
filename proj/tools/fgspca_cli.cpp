#include <string>
#include <vector>

#include "fgspca/run_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fgspca::run_cli(std::move(args));
}
