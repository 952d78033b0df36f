#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "cotkd/log.hpp"

int main(int argc, char** argv) {
    cotkd::log::set_level(cotkd::log::Level::Error);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
