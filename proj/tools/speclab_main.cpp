#include "speclab/cli.hpp"

int main(int argc, char** argv) {
  return speclab::cli::run({argv + 1, argv + argc});
}
