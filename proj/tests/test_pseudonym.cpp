#include <doctest.h>

#include <cstdlib>
#include <set>
#include <unordered_set>

#include "icsmon/pseudonym.hpp"

using namespace icsmon;

namespace {

pseudonym_key test_key() {
  return pseudonym_key::from_hex("000102030405060708090a0b0c0d0e0f");
}

} // namespace

TEST_CASE("ipv4 parse and format") {
  CHECK(parse_ipv4("192.0.2.1") == uint32_t(0xc0000201));
  CHECK(parse_ipv4("0.0.0.0") == uint32_t(0));
  CHECK(parse_ipv4("255.255.255.255") == uint32_t(0xffffffff));
  CHECK_FALSE(parse_ipv4("192.0.2").has_value());
  CHECK_FALSE(parse_ipv4("192.0.2.256").has_value());
  CHECK_FALSE(parse_ipv4("192.0.2.1.5").has_value());
  CHECK_FALSE(parse_ipv4("not an ip").has_value());
  CHECK(format_ipv4(0xc0000201) == "192.0.2.1");
  for (uint32_t ip : {0u, 1u, 0x0a000001u, 0xc0a80101u, 0xffffffffu})
    CHECK(parse_ipv4(format_ipv4(ip)) == ip);
}

TEST_CASE("pseudonyms are deterministic and key dependent") {
  pseudonymizer a(test_key());
  pseudonymizer b(test_key());
  pseudonymizer c(pseudonym_key::from_hex("f0e0d0c0b0a090807060504030201000"));

  auto ip = *parse_ipv4("198.51.100.23");
  CHECK(a.pseudonym(ip) == b.pseudonym(ip));
  CHECK(a.pseudonym(ip) == a.pseudonym("198.51.100.23"));
  CHECK(a.pseudonym(ip) != c.pseudonym(ip));
  CHECK(a.pseudonym(ip).size() == 8);
  for (char ch : a.pseudonym(ip))
    CHECK(((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')));
}

TEST_CASE("pseudonym does not leak the address") {
  pseudonymizer p(test_key());
  auto ip = *parse_ipv4("203.0.113.77");
  char direct[16];
  std::snprintf(direct, sizeof(direct), "%08x", ip);
  CHECK(p.pseudonym(ip) != direct);
}

TEST_CASE("permutation is injective over a large sample") {
  pseudonymizer p(test_key());
  std::unordered_set<uint32_t> seen;
  seen.reserve(1u << 20);
  // one /12 worth of consecutive addresses plus a spread of strides
  for (uint32_t i = 0; i < (1u << 20); ++i) {
    auto out = p.permute(0x0a000000u + i);
    CHECK_MESSAGE(seen.insert(out).second, "collision at offset " << i);
  }
  seen.clear();
  for (uint64_t i = 0; i < 200000; ++i) {
    auto out = p.permute(uint32_t(i * 21467u));
    CHECK(seen.insert(out).second);
  }
}

TEST_CASE("permutation round trips through its inverse structure") {
  // A Feistel permutation is bijective, so distinct inputs map to distinct
  // outputs and the output space matches the input space size-wise. Spot
  // check invertibility indirectly: no two of a dense stripe collide and
  // outputs are stable across instances.
  pseudonymizer p(test_key());
  pseudonymizer q(test_key());
  for (uint32_t ip = 0xc0a80000u; ip < 0xc0a80000u + 4096; ++ip)
    CHECK(p.permute(ip) == q.permute(ip));
}

TEST_CASE("key loading") {
  auto k = pseudonym_key::from_hex("00112233445566778899aabbccddeeff");
  CHECK(k.bytes[0] == 0x00);
  CHECK(k.bytes[1] == 0x11);
  CHECK(k.bytes[15] == 0xff);
  CHECK_THROWS(pseudonym_key::from_hex("too short"));
  CHECK_THROWS(pseudonym_key::from_hex("00112233445566778899aabbccddee"));
  CHECK_THROWS(pseudonym_key::from_hex("00112233445566778899aabbccddeegg"));

  ::setenv("ICSMON_TEST_KEY", "00112233445566778899aabbccddeeff", 1);
  auto ke = pseudonym_key::from_env("ICSMON_TEST_KEY");
  CHECK(ke.bytes == k.bytes);
  ::unsetenv("ICSMON_TEST_KEY");
  CHECK_THROWS(pseudonym_key::from_env("ICSMON_TEST_KEY"));
}
