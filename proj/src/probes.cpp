#include "icsmon/probes.hpp"

#include <array>
#include <cstring>

namespace icsmon {

namespace {

struct name_entry {
  probe_kind kind;
  std::string_view name;
};

constexpr std::array<name_entry, 6> names{{
    {probe_kind::none, "none"},
    {probe_kind::protocol_specific_request, "protocol-specific-request"},
    {probe_kind::syn_only, "syn-only"},
    {probe_kind::rst_only, "rst-only"},
    {probe_kind::udp_probe, "udp-probe"},
    {probe_kind::established_handshake, "established-handshake"},
}};

uint16_t be16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

uint32_t be32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
         static_cast<uint32_t>(p[2]) << 8 | p[3];
}

uint16_t le16(const uint8_t* p) {
  return static_cast<uint16_t>(p[1] << 8 | p[0]);
}

// BACnet confirmed request with service choice readProperty (0x0c).
bool bacnet_read_property(const std::vector<uint8_t>& v) {
  size_t n = v.size();
  if (n < 10 || v[0] != 0x81)
    return false;
  size_t npdu;
  if (v[1] == 0x0a || v[1] == 0x0b)
    npdu = 4;
  else if (v[1] == 0x04)
    npdu = 10;
  else
    return false;
  if (npdu + 2 > n || v[npdu] != 0x01)
    return false;
  uint8_t ctrl = v[npdu + 1];
  if (ctrl & 0x80)
    return false; // network-layer message, no APDU
  size_t off = npdu + 2;
  if (ctrl & 0x20) { // DNET/DLEN/DADR
    if (off + 3 > n)
      return false;
    off += 3u + v[off + 2];
  }
  if (ctrl & 0x08) { // SNET/SLEN/SADR
    if (off + 3 > n)
      return false;
    off += 3u + v[off + 2];
  }
  if (ctrl & 0x20)
    ++off; // hop count
  if (off + 4 > n)
    return false;
  return (v[off] & 0xf0) == 0x00 && v[off + 3] == 0x0c;
}

// CoAP GET whose Uri-Path options spell ".well-known/core".
bool coap_wellknown_core(const std::vector<uint8_t>& v) {
  size_t n = v.size();
  if (n < 4 || v[0] >> 6 != 1 || v[1] != 0x01)
    return false;
  uint8_t tkl = v[0] & 0x0f;
  if (tkl > 8)
    return false;
  size_t idx = 4u + tkl;
  uint32_t number = 0;
  std::string path;
  while (idx < n) {
    uint8_t b = v[idx];
    if (b == 0xff)
      break;
    uint32_t delta = b >> 4;
    uint32_t olen = b & 0x0f;
    if (delta == 15 || olen == 15)
      return false;
    ++idx;
    if (delta == 13) {
      if (idx >= n)
        return false;
      delta = 13u + v[idx++];
    } else if (delta == 14) {
      if (idx + 2 > n)
        return false;
      delta = 269u + be16(v.data() + idx);
      idx += 2;
    }
    if (olen == 13) {
      if (idx >= n)
        return false;
      olen = 13u + v[idx++];
    } else if (olen == 14) {
      if (idx + 2 > n)
        return false;
      olen = 269u + be16(v.data() + idx);
      idx += 2;
    }
    if (idx + olen > n)
      return false;
    number += delta;
    if (number == 11) { // Uri-Path
      if (!path.empty())
        path += '/';
      path.append(reinterpret_cast<const char*>(v.data() + idx), olen);
    }
    idx += olen;
  }
  return path == ".well-known/core";
}

bool enip_list_identity(const std::vector<uint8_t>& v) {
  return v.size() >= 4 && le16(v.data()) == 0x0063 && le16(v.data() + 2) == 0;
}

bool hart_session_initiate(const std::vector<uint8_t>& v) {
  return v.size() >= 8 && v[0] == 1 && v[1] == 0 && v[2] == 0;
}

// FINS Controller Data Read: MRC 0x05, SRC 0x01.
bool fins_controller_data_read(const sampled_packet& pkt) {
  const auto& v = pkt.payload;
  if (pkt.tr == transport::tcp) {
    if (v.size() < 28 || std::memcmp(v.data(), "FINS", 4) != 0)
      return false;
    if (be32(v.data() + 8) != 2)
      return false; // frame-send command
    return v[26] == 0x05 && v[27] == 0x01;
  }
  if (v.size() < 12 || (v[0] & 0xc0) != 0x80)
    return false;
  return v[10] == 0x05 && v[11] == 0x01;
}

// ATG status query, optionally preceded by SOH. The bare tag only: a report
// that echoes the tag and continues with inventory lines is a response.
bool atg_i20100(const std::vector<uint8_t>& v) {
  size_t off = (!v.empty() && v[0] == 0x01) ? 1 : 0;
  if (v.size() < off + 6)
    return false;
  if (v[off] != 'I' && v[off] != 'i')
    return false;
  if (std::memcmp(v.data() + off + 1, "20100", 5) != 0)
    return false;
  for (size_t i = off + 6; i < v.size(); ++i)
    if (v[i] != '\r' && v[i] != '\n')
      return false;
  return true;
}

bool specific_request(const sampled_packet& pkt, protocol_id candidate) {
  switch (candidate) {
  case protocol_id::bacnet_ip:
    return bacnet_read_property(pkt.payload);
  case protocol_id::coap:
    return coap_wellknown_core(pkt.payload);
  case protocol_id::ethernet_ip:
    return enip_list_identity(pkt.payload);
  case protocol_id::hart_ip:
    return hart_session_initiate(pkt.payload);
  case protocol_id::omron_fins:
    return fins_controller_data_read(pkt);
  case protocol_id::atg:
    return atg_i20100(pkt.payload);
  default:
    return false;
  }
}

} // namespace

std::string_view to_string(probe_kind k) {
  return names[static_cast<size_t>(k)].name;
}

std::optional<probe_kind> parse_probe_kind(std::string_view name) {
  for (const auto& e : names)
    if (e.name == name)
      return e.kind;
  return std::nullopt;
}

bool is_scanner_probe(probe_kind k) {
  return k == probe_kind::protocol_specific_request ||
         k == probe_kind::syn_only || k == probe_kind::udp_probe;
}

probe_kind match_probe(const sampled_packet& pkt, protocol_id candidate) {
  if (specific_request(pkt, candidate))
    return probe_kind::protocol_specific_request;
  if (pkt.tr == transport::tcp) {
    if (pkt.tcp_flags == tcpflag::syn && pkt.payload.empty())
      return probe_kind::syn_only;
    if (pkt.tcp_flags & tcpflag::rst)
      return probe_kind::rst_only;
    if ((pkt.tcp_flags & (tcpflag::syn | tcpflag::ack)) ==
        (tcpflag::syn | tcpflag::ack))
      return probe_kind::established_handshake;
    return probe_kind::none;
  }
  if (pkt.tr == transport::udp && pkt.payload.size() <= 4)
    return probe_kind::udp_probe;
  return probe_kind::none;
}

} // namespace icsmon
