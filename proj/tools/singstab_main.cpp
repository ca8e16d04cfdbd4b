#include "singstab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  int code = 0;
  const auto cfg =
      singstab::cli::parse_args(argc, argv, &code, std::cout, std::cerr);
  if (!cfg) return code;
  return singstab::cli::run(*cfg, std::cout, std::cerr);
}
