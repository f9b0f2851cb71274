#include <catch2/catch_amalgamated.hpp>

#include "rydrx/envelope.hpp"
#include "rydrx/errors.hpp"

using namespace rydrx;

TEST_CASE("constant envelope", "[envelope]") {
  Envelope e = Envelope::constant(0.75);
  CHECK(e(-1e9) == 0.75);
  CHECK(e(0.0) == 0.75);
  CHECK(e(1e9) == 0.75);
  CHECK(e.breakpoints().size() == 1);
  CHECK(e.is_constant_on(-5.0, 5.0));
}

TEST_CASE("rectangle pulse is right-continuous at jumps", "[envelope]") {
  Envelope e = Envelope::rectangle(2.0, 5.0);
  CHECK(e(1.999) == 0.0);
  CHECK(e(2.0) == 1.0);
  CHECK(e(3.7) == 1.0);
  CHECK(e(5.0) == 0.0);
  CHECK(e(6.0) == 0.0);
  CHECK(e.left_limit(2.0) == 0.0);
  CHECK(e.left_limit(5.0) == 1.0);
  CHECK(e.breakpoints() == std::vector<double>{2.0, 5.0});
  CHECK(e.is_constant_on(2.0, 5.0));
  CHECK(e.is_constant_on(0.0, 2.0));
  CHECK_FALSE(e.is_constant_on(1.0, 3.0));
  CHECK_FALSE(e.is_constant_on(4.0, 6.0));
}

TEST_CASE("ramped rectangle interpolates linearly", "[envelope]") {
  Envelope e = Envelope::ramped_rectangle(1.0, 3.0, 0.5);
  CHECK(e(1.0) == 0.0);
  CHECK(e(1.25) == Catch::Approx(0.5).margin(1e-15));
  CHECK(e(1.5) == 1.0);
  CHECK(e(2.9) == 1.0);
  CHECK(e(3.25) == Catch::Approx(0.5).margin(1e-15));
  CHECK(e(3.5) == 0.0);
  CHECK(e(4.0) == 0.0);
  CHECK_FALSE(e.is_constant_on(1.0, 1.5));
  CHECK(e.is_constant_on(1.5, 3.0));
  CHECK(e.left_limit(3.5) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("envelope validation", "[envelope]") {
  CHECK_THROWS_AS(Envelope::constant(1.5), ConfigError);
  CHECK_THROWS_AS(Envelope::constant(-0.1), ConfigError);
  CHECK_THROWS_AS(Envelope::from_nodes({}), ConfigError);
  CHECK_THROWS_AS(Envelope::from_nodes({{0.0, 0.0}, {-1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(
      Envelope::from_nodes({{0.0, 0.0}, {0.0, 0.5}, {0.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(Envelope::rectangle(2.0, 2.0), ConfigError);
  CHECK_THROWS_AS(Envelope::ramped_rectangle(0.0, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(Envelope::ramped_rectangle(0.0, 1.0, 0.0), ConfigError);
}
