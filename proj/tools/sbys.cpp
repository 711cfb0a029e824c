#include "sbys/cli.hpp"

int main(int argc, char** argv) {
  return sbys::cli_main(argc, argv);
}
