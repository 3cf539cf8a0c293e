#include <catch2/catch_amalgamated.hpp>

#include "hetnet/rng.hpp"

using namespace hetnet;

// Known-answer vectors for philox4x32-10 from the reference implementation's
// test suite.
TEST_CASE("philox4x32-10 known answers", "[rng]") {
  const auto zero = Philox4x32::block({0, 0}, {0, 0, 0, 0});
  CHECK(zero == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

  const auto ones = Philox4x32::block({0xffffffffu, 0xffffffffu},
                                      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

  const auto pi = Philox4x32::block({0xa4093822u, 0x299f31d0u},
                                    {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
  CHECK(pi == std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are deterministic and keyed by replication and purpose", "[rng]") {
  RngStream a(42, 0, 0), b(42, 0, 0);
  for (int n = 0; n < 100; ++n) REQUIRE(a.next_u32() == b.next_u32());

  RngStream c(42, 1, 0), d(42, 0, 1), e(43, 0, 0);
  RngStream base(42, 0, 0);
  bool all_equal_c = true, all_equal_d = true, all_equal_e = true;
  for (int n = 0; n < 16; ++n) {
    const uint32_t x = base.next_u32();
    all_equal_c &= (c.next_u32() == x);
    all_equal_d &= (d.next_u32() == x);
    all_equal_e &= (e.next_u32() == x);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
  CHECK_FALSE(all_equal_e);
}

TEST_CASE("uniform doubles live in [0,1) and exponentials are positive", "[rng]") {
  RngStream s(7, 0, 0);
  double sum = 0;
  for (int n = 0; n < 10000; ++n) {
    const double u = s.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000.0 == Catch::Approx(0.5).margin(0.02));

  RngStream t(7, 1, 0);
  double mean = 0;
  for (int n = 0; n < 10000; ++n) {
    const double x = t.exponential(2.0);
    REQUIRE(x >= 0.0);
    mean += x;
  }
  CHECK(mean / 10000.0 == Catch::Approx(0.5).margin(0.02));
}
