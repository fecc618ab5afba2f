#include <doctest.h>

#include "icsmon/itproto.hpp"
#include "icsmon/samples_io.hpp"

using namespace icsmon;

namespace {

sampled_packet make(transport tr, uint16_t sport, uint16_t dport,
                    const std::vector<uint8_t>& payload) {
  sampled_packet pkt;
  pkt.tr = tr;
  pkt.src_port = sport;
  pkt.dst_port = dport;
  pkt.payload = payload;
  return pkt;
}

std::vector<uint8_t> ascii(const std::string& s) {
  return {s.begin(), s.end()};
}

std::vector<uint8_t> hx(const std::string& hex) {
  std::vector<uint8_t> out;
  REQUIRE(from_hex(hex, out));
  return out;
}

} // namespace

TEST_CASE("tls and ssh recognition") {
  CHECK(recognize_it(make(transport::tcp, 50000, 443, hx("1603030050"))) ==
        it_label::tls);
  CHECK(recognize_it(make(transport::tcp, 50000, 8883, hx("1703030020"))) ==
        it_label::tls);
  // Wrong version byte: not TLS.
  CHECK(recognize_it(make(transport::tcp, 50000, 443, hx("1604030050"))) ==
        it_label::generic_tcp);
  // Absurd record length: not TLS.
  CHECK(recognize_it(make(transport::tcp, 50000, 443, hx("160303f000"))) ==
        it_label::generic_tcp);
  CHECK(recognize_it(make(transport::tcp, 50000, 22,
                          ascii("SSH-2.0-OpenSSH_8.9"))) == it_label::ssh);
}

TEST_CASE("http recognition includes the coap lookalike") {
  CHECK(recognize_it(make(transport::tcp, 50000, 80, ascii("GET / HTTP/1.1"))) ==
        it_label::http);
  CHECK(recognize_it(make(transport::tcp, 80, 50000,
                          ascii("HTTP/1.1 200 OK\r\n"))) == it_label::http);
  // The same bytes that pass the CoAP dissector must still read as HTTP.
  CHECK(recognize_it(make(transport::tcp, 50000, 5683,
                          ascii("GET /.well-known/core HTTP/1.1"))) ==
        it_label::http);
  CHECK(recognize_it(make(transport::tcp, 50000, 80, ascii("NOTHTTP"))) ==
        it_label::generic_tcp);
}

TEST_CASE("dns requires port 53 and a sane header") {
  auto query = hx("abcd01000001000000000000");
  CHECK(recognize_it(make(transport::udp, 50000, 53, query)) == it_label::dns);
  CHECK(recognize_it(make(transport::udp, 53, 50000, query)) == it_label::dns);
  CHECK(recognize_it(make(transport::udp, 50000, 54, query)) ==
        it_label::generic_udp);
  // Zero questions.
  CHECK(recognize_it(make(transport::udp, 50000, 53,
                          hx("abcd01000000000000000000"))) ==
        it_label::generic_udp);
  // TCP carries a two-byte length prefix.
  auto tcp_query = hx("000cabcd01000001000000000000");
  CHECK(recognize_it(make(transport::tcp, 50000, 53, tcp_query)) ==
        it_label::dns);
}

TEST_CASE("stun sip and xmpp recognition") {
  CHECK(recognize_it(make(transport::udp, 50000, 3478,
                          hx("000100002112a442000000000000000000000000"))) ==
        it_label::stun);
  CHECK(recognize_it(make(transport::udp, 50000, 3478,
                          hx("000100012112a442000000000000000000000000"))) ==
        it_label::generic_udp); // unaligned length
  CHECK(recognize_it(make(transport::udp, 50000, 5060,
                          ascii("INVITE sip:alice@example.com SIP/2.0"))) ==
        it_label::sip);
  CHECK(recognize_it(make(transport::udp, 5060, 50000,
                          ascii("SIP/2.0 200 OK"))) == it_label::sip);
  CHECK(recognize_it(make(transport::tcp, 50000, 5222,
                          ascii("<stream:stream to='example.com'"))) ==
        it_label::xmpp);
  CHECK(recognize_it(make(transport::tcp, 50000, 5222,
                          ascii("<?xml version='1.0'?>"))) == it_label::xmpp);
}

TEST_CASE("openvpn rtcp ftp telnet bittorrent recognition") {
  CHECK(recognize_it(make(transport::udp, 50000, 1194, hx("3800000001"))) ==
        it_label::openvpn);
  CHECK(recognize_it(make(transport::udp, 50000, 1195, hx("3800000001"))) ==
        it_label::generic_udp);
  CHECK(recognize_it(make(transport::udp, 50001, 50003,
                          hx("80c800060011223344556677"))) == it_label::rtcp);
  CHECK(recognize_it(make(transport::tcp, 21, 50000,
                          ascii("220 ftp.example.com ready"))) ==
        it_label::ftp);
  CHECK(recognize_it(make(transport::tcp, 50000, 21, ascii("USER anonymous"))) ==
        it_label::ftp);
  CHECK(recognize_it(make(transport::tcp, 23, 50000, hx("fffd01fffb03"))) ==
        it_label::telnet);
  auto bt = ascii("\x13"
                  "BitTorrent protocol");
  CHECK(recognize_it(make(transport::tcp, 50000, 6881, bt)) ==
        it_label::bittorrent);
  CHECK(recognize_it(make(transport::udp, 50000, 6969,
                          hx("0000041727101980000000001234abcd"))) ==
        it_label::bittorrent);
}

TEST_CASE("fallback labels by transport") {
  CHECK(recognize_it(make(transport::tcp, 50000, 4567, hx("dead"))) ==
        it_label::generic_tcp);
  CHECK(recognize_it(make(transport::udp, 50000, 4567, hx("dead"))) ==
        it_label::generic_udp);
  CHECK(recognize_it(make(transport::icmp, 0, 0, hx("0800"))) ==
        it_label::icmp);
  CHECK(recognize_it(make(transport::other, 0, 0, {})) == it_label::other);
  // ICS payloads stay generic.
  CHECK(recognize_it(make(transport::tcp, 50000, 502,
                          hx("000100000006010600110003"))) ==
        it_label::generic_tcp);
  CHECK(recognize_it(make(transport::tcp, 50000, 1883,
                          hx("100c00044d5154540402003c0000"))) ==
        it_label::generic_tcp);
}

TEST_CASE("label names round trip and specificity is split correctly") {
  int specific = 0;
  for (int i = 0; i < 16; ++i) {
    auto l = static_cast<it_label>(i);
    auto parsed = parse_it_label(std::string(to_string(l)));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == l);
    specific += is_specific(l);
  }
  CHECK(specific == 12);
  CHECK(is_specific(it_label::tls));
  CHECK_FALSE(is_specific(it_label::generic_tcp));
  CHECK_FALSE(is_specific(it_label::generic_udp));
  CHECK_FALSE(is_specific(it_label::icmp));
  CHECK_FALSE(is_specific(it_label::other));
  CHECK_FALSE(parse_it_label("NotALabel").has_value());
}
