#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include <doctest.h>

#include "icsmon/classify.hpp"
#include "icsmon/flows.hpp"

using namespace icsmon;

namespace {

std::vector<uint8_t> hx(const std::string& hex) {
  std::vector<uint8_t> v;
  for (size_t i = 0; i + 1 < hex.size(); i += 2)
    v.push_back(static_cast<uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  return v;
}

std::vector<uint8_t> ascii(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

sampled_packet make(const std::string& src, const std::string& dst,
                    transport tr, uint16_t sport, uint16_t dport,
                    std::vector<uint8_t> payload, int64_t ts = 1578960000,
                    uint8_t flags = tcpflag::psh | tcpflag::ack) {
  sampled_packet p;
  p.ts_sec = ts;
  p.src.pseudonym = src;
  p.src.in_ixp_area = true;
  p.dst.pseudonym = dst;
  p.dst.in_ixp_area = true;
  p.tr = tr;
  p.src_port = sport;
  p.dst_port = dport;
  p.ip_proto = tr == transport::tcp ? 6 : tr == transport::udp ? 17 : 1;
  p.tcp_flags = tr == transport::tcp ? flags : 0;
  p.payload = std::move(payload);
  p.captured_len = static_cast<uint16_t>(std::min<size_t>(p.payload.size() + 54, 128));
  p.rate_reciprocal = 4096;
  return p;
}

const std::string kTls = "16030300500100004c03";
const std::string kWfModbus = "000100000006010600110003";
const std::string kHttp = "GET / HTTP/1.1\r\nHost: example.net\r\n\r\n";

iana_services fixture_services() {
  return iana_services::from_file(std::string(GOLDEN_DIR) +
                                  "/../iana_services.csv");
}

} // namespace

TEST_CASE("services table parses the 50-entry fixture") {
  auto svc = fixture_services();
  CHECK(svc.size() == 50);
  CHECK(svc.lookup(443, transport::tcp) == "https");
  CHECK(svc.lookup(443, transport::udp) == "https");
  CHECK(svc.lookup(1883, transport::tcp) == "mqtt");
  CHECK(svc.lookup(53, transport::udp) == "domain");
  CHECK(svc.lookup(31337, transport::tcp) == std::nullopt);
  CHECK(svc.lookup(1883, transport::udp) == std::nullopt);
}

TEST_CASE("services table rejects malformed rows with a line number") {
  std::istringstream bad("443,tcp,https\n99999,tcp,nope\n");
  CHECK_THROWS_WITH_AS(iana_services::from_stream(bad),
                       "services table line 2: bad port", std::runtime_error);
  std::istringstream missing("443,tcp\n");
  CHECK_THROWS_AS(iana_services::from_stream(missing), std::runtime_error);
  std::istringstream sctp("443,sctp,https\n");
  CHECK_THROWS_AS(iana_services::from_stream(sctp), std::runtime_error);
  std::istringstream comments("# header\n\n  \n80,tcp,http\n");
  CHECK(iana_services::from_stream(comments).size() == 1);
}

TEST_CASE("aggregate groups by canonical key with idle timeout") {
  auto reg = protocol_registry::builtin();
  std::vector<sampled_packet> pkts;

  SUBCASE("one hundred packets within the timeout form one flow") {
    for (int i = 0; i < 100; ++i)
      pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443,
                          hx(kTls), 1578960000 + i));
    auto flows = aggregate(pkts, reg);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].packet_count == 100);
    CHECK(flows[0].first_seen == 1578960000);
    CHECK(flows[0].last_seen == 1578960099);
    CHECK(label_name(flows[0].label) == "TLS");
  }

  SUBCASE("a gap above the timeout splits the conversation") {
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960000));
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960301));
    auto flows = aggregate(pkts, reg);
    CHECK(flows.size() == 2);
  }

  SUBCASE("a gap of exactly the timeout does not split") {
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960000));
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960300));
    auto flows = aggregate(pkts, reg);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].packet_count == 2);
  }

  SUBCASE("both directions share one flow") {
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960000));
    pkts.push_back(make("bbbb", "aaaa", transport::tcp, 443, 50000, hx(kTls),
                        1578960001));
    auto flows = aggregate(pkts, reg);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].packet_count == 2);
  }

  SUBCASE("unsorted input is ordered by timestamp before splitting") {
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960200));
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960000));
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 443, hx(kTls),
                        1578960400));
    auto flows = aggregate(pkts, reg);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].first_seen == 1578960000);
    CHECK(flows[0].last_seen == 1578960400);
  }
}

TEST_CASE("flow label keeps the most specific recognition") {
  auto reg = protocol_registry::builtin();
  std::vector<sampled_packet> pkts;
  // Garbage, then a TLS hello, then a well-formed Modbus write in the same
  // conversation: industrial beats positive IT beats fallback.
  pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 502,
                      hx("deadbeef"), 1578960000));
  auto flows = aggregate(pkts, reg);
  REQUIRE(flows.size() == 1);
  CHECK(label_name(flows[0].label) == "GenericTCP");

  pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 502, hx(kTls),
                      1578960001));
  flows = aggregate(pkts, reg);
  CHECK(label_name(flows[0].label) == "TLS");

  pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 502,
                      hx(kWfModbus), 1578960002));
  flows = aggregate(pkts, reg);
  CHECK(label_name(flows[0].label) == "Modbus/TCP");
  CHECK(std::holds_alternative<protocol_id>(flows[0].label));

  // A later, less specific packet cannot demote the label.
  pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 502,
                      hx("deadbeef"), 1578960003));
  flows = aggregate(pkts, reg);
  CHECK(label_name(flows[0].label) == "Modbus/TCP");
}

TEST_CASE("iana lower-port mapping") {
  auto svc = fixture_services();
  auto reg = protocol_registry::builtin();

  auto one_flow = [&](uint16_t sport, uint16_t dport, transport tr) {
    std::vector<sampled_packet> pkts{
        make("aaaa", "bbbb", tr, sport, dport, hx("00"), 1578960000)};
    auto flows = aggregate(pkts, reg);
    REQUIRE(flows.size() == 1);
    return flows[0];
  };

  CHECK(map_iana(one_flow(49152, 443, transport::tcp), svc) == "https");
  CHECK(map_iana(one_flow(443, 49152, transport::tcp), svc) == "https");
  CHECK(map_iana(one_flow(50000, 60000, transport::tcp), svc) == std::nullopt);
  CHECK(map_iana(one_flow(1883, 51000, transport::tcp), svc) == "mqtt");
  CHECK(map_iana(one_flow(51000, 1883, transport::tcp), svc) == "mqtt");
  // Low port present but unregistered; and transport mismatch.
  CHECK(map_iana(one_flow(31337, 50000, transport::tcp), svc) == std::nullopt);
  CHECK(map_iana(one_flow(1883, 51000, transport::udp), svc) == std::nullopt);
  // Both ports registered: the numerically smaller one wins.
  CHECK(map_iana(one_flow(80, 443, transport::tcp), svc) == "http");
  CHECK(map_iana(one_flow(443, 80, transport::tcp), svc) == "http");
}

TEST_CASE("packet-based and flow-based shares diverge on skewed flows") {
  auto reg = protocol_registry::builtin();
  std::vector<sampled_packet> pkts;
  // One chatty HTTP conversation and nine single-packet TLS conversations.
  for (int i = 0; i < 100; ++i)
    pkts.push_back(make("aaaa", "bbbb", transport::tcp, 50000, 80,
                        ascii(kHttp), 1578960000 + i));
  for (int i = 0; i < 9; ++i)
    pkts.push_back(make("cc" + std::to_string(i), "dddd", transport::tcp,
                        50001, 443, hx(kTls), 1578960000 + i));
  auto flows = aggregate(pkts, reg);
  REQUIRE(flows.size() == 10);

  auto pb = breakdown(flows, share_basis::packet_based,
                      iana_mapping::before_iana);
  REQUIRE(!pb.shares.empty());
  CHECK(pb.shares[0].first == "HTTP");
  CHECK(pb.shares[0].second == doctest::Approx(100.0 * 100 / 109));

  auto fb = breakdown(flows, share_basis::flow_based,
                      iana_mapping::before_iana);
  REQUIRE(!fb.shares.empty());
  CHECK(fb.shares[0].first == "TLS");
  CHECK(fb.shares[0].second == doctest::Approx(90.0));
  CHECK(fb.shares[1].first == "HTTP");
  CHECK(fb.shares[1].second == doctest::Approx(10.0));
}

TEST_CASE("after-iana renames only unrecognized transport traffic") {
  auto reg = protocol_registry::builtin();
  auto svc = fixture_services();
  std::vector<sampled_packet> pkts;
  // Generic TCP on 3306, TLS on 443, generic TCP on an unregistered port,
  // and a legitimate Modbus conversation.
  pkts.push_back(make("a1", "b1", transport::tcp, 50000, 3306, hx("0011"),
                      1578960000));
  pkts.push_back(make("a2", "b2", transport::tcp, 50000, 443, hx(kTls),
                      1578960000));
  pkts.push_back(make("a3", "b3", transport::tcp, 50000, 31337, hx("0011"),
                      1578960000));
  pkts.push_back(make("a4", "b4", transport::tcp, 50000, 502, hx(kWfModbus),
                      1578960000));
  auto flows = aggregate(pkts, reg);
  apply_iana(flows, svc);

  auto before = breakdown(flows, share_basis::flow_based,
                          iana_mapping::before_iana, 0);
  auto after = breakdown(flows, share_basis::flow_based,
                         iana_mapping::after_iana, 0);

  auto names = [](const traffic_breakdown& b) {
    std::vector<std::string> out;
    for (const auto& [name, pct] : b.shares)
      out.push_back(name);
    return out;
  };
  auto bn = names(before);
  auto an = names(after);
  CHECK(std::count(bn.begin(), bn.end(), "GenericTCP") == 1); // 2 flows share it
  CHECK(std::count(an.begin(), an.end(), "mysql") == 1);
  CHECK(std::count(an.begin(), an.end(), "GenericTCP") == 1); // 31337 unmapped
  CHECK(std::count(an.begin(), an.end(), "TLS") == 1);        // never renamed
  CHECK(std::count(an.begin(), an.end(), "Modbus/TCP") == 1);
  for (const auto& [name, pct] : after.shares)
    CHECK(pct == doctest::Approx(25.0));
}

TEST_CASE("breakdown respects top-k and percentages stay bounded") {
  auto reg = protocol_registry::builtin();
  std::vector<sampled_packet> pkts;
  // Six distinct labels with weights 6..1 so top-5 truncates one.
  struct row {
    transport tr;
    uint16_t port;
    std::vector<uint8_t> payload;
  };
  const row rows[] = {
      {transport::tcp, 443, hx("1603030050")},
      {transport::tcp, 80, ascii("GET / HTTP/1.1")},
      {transport::udp, 53, hx("abcd01000001000000000000")},
      {transport::udp, 3478, hx("000100002112a442000000000000000000000000")},
      {transport::udp, 5060, ascii("INVITE sip:alice@example.com SIP/2.0")},
      {transport::udp, 40000, hx("00")},
  };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6 - i; ++j)
      pkts.push_back(make("h" + std::to_string(i), "srv", rows[i].tr, 50000,
                          rows[i].port, rows[i].payload, 1578960000 + j));
  auto flows = aggregate(pkts, reg);
  REQUIRE(flows.size() == 6);
  auto top = breakdown(flows, share_basis::packet_based,
                       iana_mapping::before_iana, 5);
  CHECK(top.shares.size() == 5);
  CHECK(top.shares[0].first == "TLS");
  CHECK(top.shares[0].second == doctest::Approx(100.0 * 6 / 21));
  double sum = 0;
  for (const auto& [name, pct] : top.shares) {
    CHECK(pct >= 0.0);
    CHECK(pct <= 100.0);
    sum += pct;
  }
  CHECK(sum < 100.0);

  auto all = breakdown(flows, share_basis::packet_based,
                       iana_mapping::before_iana, 0);
  double total = 0;
  for (const auto& [name, pct] : all.shares)
    total += pct;
  CHECK(total == doctest::Approx(100.0));

  CHECK(breakdown({}, share_basis::flow_based, iana_mapping::after_iana)
            .shares.empty());
}

TEST_CASE("flow totals and packet-based shares match per-packet tallies") {
  auto reg = protocol_registry::builtin();
  std::mt19937_64 rng(20260825u);
  for (int round = 0; round < 10; ++round) {
    std::vector<sampled_packet> pkts;
    std::map<std::string, uint64_t> direct;
    int hosts = 1 + int(rng() % 8);
    int n = 1 + int(rng() % 200);
    for (int i = 0; i < n; ++i) {
      int h = int(rng() % uint64_t(hosts));
      uint16_t port = (rng() % 2) ? 443 : 80;
      auto payload = port == 443 ? hx(kTls) : ascii(kHttp);
      // Keep each conversation single-labeled so the identity is exact.
      pkts.push_back(make("h" + std::to_string(h) + std::to_string(port),
                          "server", transport::tcp, 50000, port, payload,
                          1578960000 + int64_t(rng() % 60)));
      direct[port == 443 ? "TLS" : "HTTP"] += 1;
    }
    auto flows = aggregate(pkts, reg);
    uint64_t total = 0;
    for (const auto& f : flows)
      total += f.packet_count;
    CHECK(total == pkts.size());

    auto pb = breakdown(flows, share_basis::packet_based,
                        iana_mapping::before_iana, 0);
    for (const auto& [name, pct] : pb.shares) {
      REQUIRE(direct.count(name) == 1);
      CHECK(pct == doctest::Approx(100.0 * double(direct[name]) / double(n)));
    }
  }
}

TEST_CASE("coexistence report measures it traffic beside ics roles") {
  auto reg = protocol_registry::builtin();
  intel_db intel;
  std::vector<sampled_packet> pkts;

  // Six disjoint legitimate Modbus pairs: twelve ICS hosts.
  for (int i = 0; i < 6; ++i) {
    std::string a = "plc" + std::to_string(i);
    std::string b = "rtu" + std::to_string(i);
    pkts.push_back(make(a, b, transport::tcp, 49100, 502, hx(kWfModbus),
                        1578960000 + i));
  }
  // Eleven of the twelve hosts also speak TLS to an outside server.
  for (int i = 0; i < 6; ++i) {
    pkts.push_back(make("plc" + std::to_string(i), "web", transport::tcp,
                        50000, 443, hx(kTls), 1578961000 + i));
    if (i < 5)
      pkts.push_back(make("rtu" + std::to_string(i), "web", transport::tcp,
                          50000, 443, hx(kTls), 1578962000 + i));
  }
  // Three of the six legitimate pairs also exchange OpenVPN between each
  // other.
  for (int i = 0; i < 3; ++i)
    pkts.push_back(make("plc" + std::to_string(i), "rtu" + std::to_string(i),
                        transport::udp, 49200, 1194, hx("3800000000"),
                        1578963000 + i));

  auto result = classify_packets(pkts, reg, intel);
  auto roles = host_roles(pkts, result.verdicts);
  auto report = it_coexistence(roles, pkts, result.verdicts);

  CHECK(report.ics_hosts == 12);
  CHECK(report.ics_hosts_with_it == 11);
  CHECK(report.ics_host_share_pct == doctest::Approx(100.0 * 11 / 12));
  CHECK(report.legitimate_pairs == 6);
  CHECK(report.legitimate_pairs_with_it == 3);
  CHECK(report.legitimate_pair_share_pct == doctest::Approx(50.0));
  // rtu5 is the only ICS host with no IT traffic.
  CHECK(report.nat_suspects.size() == 11);
  for (const auto& host : report.nat_suspects)
    CHECK(host != "rtu5");

  CHECK_THROWS_AS(it_coexistence(roles, pkts, {}), std::invalid_argument);
}

TEST_CASE("coexistence with no it traffic flags nothing") {
  auto reg = protocol_registry::builtin();
  intel_db intel;
  std::vector<sampled_packet> pkts{make("plc0", "rtu0", transport::tcp, 49100,
                                        502, hx(kWfModbus), 1578960000)};
  auto result = classify_packets(pkts, reg, intel);
  auto roles = host_roles(pkts, result.verdicts);
  auto report = it_coexistence(roles, pkts, result.verdicts);
  CHECK(report.ics_hosts == 2);
  CHECK(report.ics_hosts_with_it == 0);
  CHECK(report.ics_host_share_pct == 0.0);
  CHECK(report.nat_suspects.empty());
  CHECK(report.legitimate_pairs == 1);
  CHECK(report.legitimate_pairs_with_it == 0);
}
