#include "icsmon/itproto.hpp"

#include <array>
#include <cstring>

namespace icsmon {

namespace {

struct name_entry {
  it_label label;
  std::string_view name;
};

constexpr std::array<name_entry, 16> names{{
    {it_label::tls, "TLS"},
    {it_label::http, "HTTP"},
    {it_label::dns, "DNS"},
    {it_label::stun, "STUN"},
    {it_label::xmpp, "XMPP"},
    {it_label::sip, "SIP"},
    {it_label::openvpn, "OpenVPN"},
    {it_label::rtcp, "RTCP"},
    {it_label::ftp, "FTP"},
    {it_label::telnet, "Telnet"},
    {it_label::bittorrent, "BitTorrent"},
    {it_label::ssh, "SSH"},
    {it_label::generic_tcp, "GenericTCP"},
    {it_label::generic_udp, "GenericUDP"},
    {it_label::icmp, "ICMP"},
    {it_label::other, "Other"},
}};

bool starts_with(const std::vector<uint8_t>& payload, std::string_view s) {
  if (payload.size() < s.size())
    return false;
  return std::memcmp(payload.data(), s.data(), s.size()) == 0;
}

bool contains(const std::vector<uint8_t>& payload, std::string_view s) {
  if (payload.size() < s.size())
    return false;
  const char* hay = reinterpret_cast<const char*>(payload.data());
  return std::string_view(hay, payload.size()).find(s) !=
         std::string_view::npos;
}

uint16_t be16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

uint32_t be32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
         static_cast<uint32_t>(p[2]) << 8 | p[3];
}

bool on_port(const sampled_packet& pkt, uint16_t port) {
  return pkt.src_port == port || pkt.dst_port == port;
}

bool looks_tls(const std::vector<uint8_t>& v) {
  if (v.size() < 3)
    return false;
  if (v[0] < 0x14 || v[0] > 0x17)
    return false; // record types CCS..application data
  if (v[1] != 0x03 || v[2] > 0x04)
    return false; // legal version bytes
  if (v.size() >= 5 && be16(v.data() + 3) > 0x4800)
    return false; // record length bound
  return true;
}

bool looks_http(const std::vector<uint8_t>& v) {
  static constexpr std::string_view methods[] = {
      "GET ",     "POST ",  "PUT ",     "HEAD ",  "DELETE ",
      "OPTIONS ", "TRACE ", "CONNECT ", "PATCH ", "HTTP/",
  };
  for (auto m : methods)
    if (v.size() >= m.size() &&
        std::memcmp(v.data(), m.data(), m.size()) == 0)
      return true;
  return false;
}

bool looks_dns(const sampled_packet& pkt) {
  if (!on_port(pkt, 53))
    return false;
  const auto& v = pkt.payload;
  size_t off = pkt.tr == transport::tcp ? 2 : 0; // TCP carries a length prefix
  if (v.size() < off + 12)
    return false;
  const uint8_t* h = v.data() + off;
  uint16_t flags = be16(h + 2);
  if (((flags >> 11) & 0x0f) > 5)
    return false; // opcode
  uint16_t qd = be16(h + 4);
  if (qd == 0 || qd > 32)
    return false;
  if (be16(h + 6) > 256 || be16(h + 8) > 256 || be16(h + 10) > 256)
    return false;
  return true;
}

bool looks_stun(const std::vector<uint8_t>& v) {
  if (v.size() < 20)
    return false;
  if (v[0] & 0xc0)
    return false;
  if (be32(v.data() + 4) != 0x2112a442)
    return false; // magic cookie
  return (be16(v.data() + 2) & 3) == 0;
}

bool looks_sip(const std::vector<uint8_t>& v) {
  if (starts_with(v, "SIP/2.0"))
    return true;
  static constexpr std::string_view methods[] = {
      "INVITE ", "REGISTER ", "ACK ",    "BYE ",     "CANCEL ",
      "OPTIONS ", "SUBSCRIBE ", "NOTIFY ", "MESSAGE ", "REFER ",
  };
  for (auto m : methods)
    if (starts_with(v, m) && contains(v, "sip:"))
      return true;
  return false;
}

bool looks_openvpn(const sampled_packet& pkt) {
  if (!on_port(pkt, 1194) || pkt.tr != transport::udp)
    return false;
  if (pkt.payload.empty())
    return false;
  uint8_t op = pkt.payload[0] >> 3;
  return op >= 1 && op <= 10;
}

bool looks_rtcp(const std::vector<uint8_t>& v) {
  if (v.size() < 8)
    return false;
  if (v[0] >> 6 != 2)
    return false; // version
  if (v[1] < 200 || v[1] > 204)
    return false; // SR/RR/SDES/BYE/APP
  return true;
}

bool looks_ftp(const sampled_packet& pkt) {
  if (!on_port(pkt, 21))
    return false;
  const auto& v = pkt.payload;
  if (v.size() >= 4 && v[0] >= '1' && v[0] <= '5' && v[1] >= '0' &&
      v[1] <= '9' && v[2] >= '0' && v[2] <= '9' &&
      (v[3] == ' ' || v[3] == '-'))
    return true;
  static constexpr std::string_view cmds[] = {
      "USER ", "PASS ", "RETR ", "STOR ", "LIST", "QUIT",
      "FEAT",  "PASV",  "EPSV",  "TYPE ", "CWD ", "SYST",
  };
  for (auto c : cmds)
    if (starts_with(v, c))
      return true;
  return false;
}

bool looks_telnet(const sampled_packet& pkt) {
  if (!on_port(pkt, 23))
    return false;
  const auto& v = pkt.payload;
  return v.size() >= 3 && v[0] == 0xff && v[1] >= 0xf0;
}

bool looks_bittorrent(const std::vector<uint8_t>& v) {
  if (starts_with(v, "\x13"
                     "BitTorrent protocol"))
    return true;
  if (v.size() >= 16 && be32(v.data()) == 0x00000417 &&
      be32(v.data() + 4) == 0x27101980 && be32(v.data() + 8) == 0)
    return true; // UDP tracker connect magic 0x41727101980
  if (starts_with(v, "d1:ad2:id20:") || starts_with(v, "d1:rd2:id20:"))
    return true; // DHT
  return false;
}

bool looks_xmpp(const sampled_packet& pkt) {
  const auto& v = pkt.payload;
  if (starts_with(v, "<stream:stream"))
    return true;
  return starts_with(v, "<?xml") &&
         (on_port(pkt, 5222) || on_port(pkt, 5269) || contains(v, "jabber"));
}

} // namespace

std::string_view to_string(it_label l) {
  return names[static_cast<size_t>(l)].name;
}

std::optional<it_label> parse_it_label(std::string_view name) {
  for (const auto& e : names)
    if (e.name == name)
      return e.label;
  return std::nullopt;
}

bool is_specific(it_label l) {
  return static_cast<uint8_t>(l) < static_cast<uint8_t>(it_label::generic_tcp);
}

it_label recognize_it(const sampled_packet& pkt) {
  if (pkt.tr == transport::icmp)
    return it_label::icmp;
  if (pkt.tr == transport::other)
    return it_label::other;
  const auto& v = pkt.payload;
  if (pkt.tr == transport::tcp) {
    if (looks_tls(v))
      return it_label::tls;
    if (starts_with(v, "SSH-"))
      return it_label::ssh;
    if (looks_http(v))
      return it_label::http;
  }
  if (looks_dns(pkt))
    return it_label::dns;
  if (looks_stun(v))
    return it_label::stun;
  if (looks_sip(v))
    return it_label::sip;
  if (looks_xmpp(pkt))
    return it_label::xmpp;
  if (looks_openvpn(pkt))
    return it_label::openvpn;
  if (pkt.tr == transport::udp && looks_rtcp(v))
    return it_label::rtcp;
  if (pkt.tr == transport::tcp && looks_ftp(pkt))
    return it_label::ftp;
  if (pkt.tr == transport::tcp && looks_telnet(pkt))
    return it_label::telnet;
  if (looks_bittorrent(v))
    return it_label::bittorrent;
  return pkt.tr == transport::tcp ? it_label::generic_tcp
                                  : it_label::generic_udp;
}

} // namespace icsmon
