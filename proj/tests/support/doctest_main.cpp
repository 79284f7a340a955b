#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "seeds/workers.hpp"

int main(int argc, char** argv) {
  seeds::warnings_enabled() = false;
  doctest::Context context(argc, argv);
  return context.run();
}
