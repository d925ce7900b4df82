#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "pixyz/platform.hpp"

int main(int argc, char** argv) {
  pixyz::select_reliable_blas_core(argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
