#include "ek_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ek::cli::run(std::move(args));
}
