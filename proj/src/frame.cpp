#include "icsmon/frame.hpp"

#include <cstring>

namespace icsmon {

namespace {

constexpr size_t eth_header_len = 14;
constexpr uint16_t ethertype_ipv4 = 0x0800;
constexpr uint16_t ethertype_vlan = 0x8100;
constexpr uint16_t ethertype_arp = 0x0806;

uint16_t rd16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

uint32_t rd32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
         static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}

void wr16(std::vector<uint8_t>& v, size_t off, uint16_t x) {
  v[off] = static_cast<uint8_t>(x >> 8);
  v[off + 1] = static_cast<uint8_t>(x & 0xff);
}

void wr32(std::vector<uint8_t>& v, size_t off, uint32_t x) {
  v[off] = static_cast<uint8_t>(x >> 24);
  v[off + 1] = static_cast<uint8_t>(x >> 16 & 0xff);
  v[off + 2] = static_cast<uint8_t>(x >> 8 & 0xff);
  v[off + 3] = static_cast<uint8_t>(x & 0xff);
}

uint16_t l4_checksum(const std::vector<uint8_t>& frame, size_t l4_off,
                     size_t l4_len, uint32_t src_ip, uint32_t dst_ip,
                     uint8_t proto) {
  uint32_t sum = 0;
  sum += src_ip >> 16;
  sum += src_ip & 0xffff;
  sum += dst_ip >> 16;
  sum += dst_ip & 0xffff;
  sum += proto;
  sum += static_cast<uint32_t>(l4_len);
  return internet_checksum(frame.data() + l4_off, l4_len, sum);
}

std::vector<uint8_t> build_ipv4_frame(uint32_t src_ip, uint32_t dst_ip,
                                      uint8_t proto, size_t l4_len) {
  std::vector<uint8_t> f(eth_header_len + 20 + l4_len, 0);
  static const uint8_t dst_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
  static const uint8_t src_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  std::memcpy(f.data(), dst_mac, 6);
  std::memcpy(f.data() + 6, src_mac, 6);
  wr16(f, 12, ethertype_ipv4);
  f[14] = 0x45; // version 4, IHL 5
  wr16(f, 16, static_cast<uint16_t>(20 + l4_len));
  f[22] = 64; // TTL
  f[23] = proto;
  wr32(f, 26, src_ip);
  wr32(f, 30, dst_ip);
  wr16(f, 24, internet_checksum(f.data() + 14, 20));
  return f;
}

} // namespace

uint16_t internet_checksum(const uint8_t* data, size_t len, uint32_t seed) {
  uint32_t sum = seed;
  size_t i = 0;
  for (; i + 1 < len; i += 2)
    sum += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
  if (i < len)
    sum += static_cast<uint32_t>(data[i]) << 8;
  while (sum >> 16)
    sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<uint16_t>(~sum & 0xffff);
}

std::optional<decoded_frame> parse_ethernet(const std::vector<uint8_t>& frame) {
  if (frame.size() < eth_header_len)
    return std::nullopt;
  size_t off = 12;
  uint16_t etype = rd16(frame.data() + off);
  off += 2;
  if (etype == ethertype_vlan) {
    if (frame.size() < off + 4)
      return std::nullopt;
    etype = rd16(frame.data() + off + 2);
    off += 4;
    if (etype == ethertype_vlan)
      return std::nullopt; // QinQ not expected on the mirror port
  }

  decoded_frame out;
  out.payload_offset = frame.size();
  if (etype != ethertype_ipv4)
    return out;

  if (frame.size() < off + 20)
    return out;
  const uint8_t* ip = frame.data() + off;
  if ((ip[0] >> 4) != 4)
    return out;
  size_t ihl = static_cast<size_t>(ip[0] & 0x0f) * 4;
  if (ihl < 20 || frame.size() < off + ihl)
    return out;

  out.has_ipv4 = true;
  out.ip_proto = ip[9];
  out.src_ip = rd32(ip + 12);
  out.dst_ip = rd32(ip + 16);
  size_t l4 = off + ihl;
  out.payload_offset = frame.size();

  switch (out.ip_proto) {
    case 6:
      out.tr = transport::tcp;
      if (frame.size() >= l4 + 20) {
        const uint8_t* tcp = frame.data() + l4;
        out.src_port = rd16(tcp);
        out.dst_port = rd16(tcp + 2);
        out.tcp_flags = tcp[13] & 0x3f;
        size_t doff = static_cast<size_t>(tcp[12] >> 4) * 4;
        if (doff >= 20 && frame.size() >= l4 + doff)
          out.payload_offset = l4 + doff;
      }
      break;
    case 17:
      out.tr = transport::udp;
      if (frame.size() >= l4 + 8) {
        const uint8_t* udp = frame.data() + l4;
        out.src_port = rd16(udp);
        out.dst_port = rd16(udp + 2);
        out.payload_offset = l4 + 8;
      }
      break;
    case 1:
      out.tr = transport::icmp;
      out.payload_offset = std::min(frame.size(), l4 + 8);
      break;
    default:
      out.tr = transport::other;
      break;
  }
  return out;
}

std::vector<uint8_t> build_tcp_frame(uint32_t src_ip, uint16_t src_port,
                                     uint32_t dst_ip, uint16_t dst_port,
                                     uint8_t tcp_flags,
                                     const std::vector<uint8_t>& payload,
                                     uint32_t seq, uint32_t ack) {
  size_t l4_len = 20 + payload.size();
  auto f = build_ipv4_frame(src_ip, dst_ip, 6, l4_len);
  size_t t = eth_header_len + 20;
  wr16(f, t, src_port);
  wr16(f, t + 2, dst_port);
  wr32(f, t + 4, seq);
  wr32(f, t + 8, ack);
  f[t + 12] = 5 << 4; // data offset
  f[t + 13] = tcp_flags;
  wr16(f, t + 14, 0xffff); // window
  std::memcpy(f.data() + t + 20, payload.data(), payload.size());
  wr16(f, t + 16, l4_checksum(f, t, l4_len, src_ip, dst_ip, 6));
  return f;
}

std::vector<uint8_t> build_udp_frame(uint32_t src_ip, uint16_t src_port,
                                     uint32_t dst_ip, uint16_t dst_port,
                                     const std::vector<uint8_t>& payload) {
  size_t l4_len = 8 + payload.size();
  auto f = build_ipv4_frame(src_ip, dst_ip, 17, l4_len);
  size_t u = eth_header_len + 20;
  wr16(f, u, src_port);
  wr16(f, u + 2, dst_port);
  wr16(f, u + 4, static_cast<uint16_t>(l4_len));
  std::memcpy(f.data() + u + 8, payload.data(), payload.size());
  uint16_t csum = l4_checksum(f, u, l4_len, src_ip, dst_ip, 17);
  wr16(f, u + 6, csum == 0 ? 0xffff : csum);
  return f;
}

std::vector<uint8_t> build_icmp_frame(uint32_t src_ip, uint32_t dst_ip,
                                      uint8_t type, uint8_t code) {
  auto f = build_ipv4_frame(src_ip, dst_ip, 1, 8);
  size_t c = eth_header_len + 20;
  f[c] = type;
  f[c + 1] = code;
  wr16(f, c + 2, internet_checksum(f.data() + c, 8));
  return f;
}

std::vector<uint8_t> build_arp_frame() {
  std::vector<uint8_t> f(eth_header_len + 28, 0);
  std::memset(f.data(), 0xff, 6);
  static const uint8_t src_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  std::memcpy(f.data() + 6, src_mac, 6);
  wr16(f, 12, ethertype_arp);
  wr16(f, 14, 1);      // hardware type: Ethernet
  wr16(f, 16, 0x0800); // protocol type: IPv4
  f[18] = 6;
  f[19] = 4;
  wr16(f, 20, 1); // opcode: request
  return f;
}

} // namespace icsmon
