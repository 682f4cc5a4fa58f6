#include <iostream>
#include <string>
#include <vector>

#include "capdetail/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return capdetail::RunCli(args, std::cout, std::cerr);
}
