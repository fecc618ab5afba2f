#include <doctest.h>

#include <sstream>

#include "icsmon/asmap.hpp"
#include "icsmon/pseudonym.hpp"

using namespace icsmon;

TEST_CASE("longest prefix match wins") {
  std::istringstream in(
      "10.0.0.0/8, 64500, 0\n"
      "10.1.0.0/16, 64501, 1\n"
      "10.1.2.0/24, 64502, 1\n"
      "# comment line\n"
      "0.0.0.0/0, 64999, 0\n");
  auto map = as_map::from_text(in);
  CHECK(map.size() == 4);

  CHECK(map.lookup(*parse_ipv4("10.1.2.3")).asn == 64502);
  CHECK(map.lookup(*parse_ipv4("10.1.3.3")).asn == 64501);
  CHECK(map.lookup(*parse_ipv4("10.9.9.9")).asn == 64500);
  CHECK(map.lookup(*parse_ipv4("192.0.2.1")).asn == 64999);
  CHECK(map.lookup(*parse_ipv4("10.1.2.3")).in_ixp_area);
  CHECK_FALSE(map.lookup(*parse_ipv4("10.9.9.9")).in_ixp_area);
}

TEST_CASE("unmatched addresses resolve to the zero AS") {
  std::istringstream in("10.0.0.0/8, 64500, 1\n");
  auto map = as_map::from_text(in);
  auto miss = map.lookup(*parse_ipv4("11.0.0.1"));
  CHECK(miss.asn == 0);
  CHECK_FALSE(miss.in_ixp_area);
}

TEST_CASE("host routes and the default route") {
  as_map map;
  map.add(*parse_ipv4("192.0.2.7"), 32, 64510, true);
  map.add(0, 0, 64511, false);
  CHECK(map.lookup(*parse_ipv4("192.0.2.7")).asn == 64510);
  CHECK(map.lookup(*parse_ipv4("192.0.2.8")).asn == 64511);
}

TEST_CASE("prefix bits beyond the mask are ignored") {
  as_map map;
  map.add(*parse_ipv4("10.1.2.3"), 16, 64501, true);
  CHECK(map.lookup(*parse_ipv4("10.1.200.200")).asn == 64501);
  CHECK(map.lookup(*parse_ipv4("10.2.0.1")).asn == 0);
}

TEST_CASE("malformed as map lines are rejected") {
  std::istringstream no_len("10.0.0.0, 64500, 0\n");
  CHECK_THROWS(as_map::from_text(no_len));
  std::istringstream bad_len("10.0.0.0/33, 64500, 0\n");
  CHECK_THROWS(as_map::from_text(bad_len));
  std::istringstream few("10.0.0.0/8, 64500\n");
  CHECK_THROWS(as_map::from_text(few));
  std::istringstream bad_ip("300.0.0.0/8, 64500, 0\n");
  CHECK_THROWS(as_map::from_text(bad_ip));
}
