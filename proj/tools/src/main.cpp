#include <iostream>
#include <string>
#include <vector>

#include "byzsim_app/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return byzsim::app::run_cli(args, std::cout, std::cerr);
}
