#include <iostream>

#include "forestscope/cli.hpp"

int main(int argc, char** argv) {
  return forestscope::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
