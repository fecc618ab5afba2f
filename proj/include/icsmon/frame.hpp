#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "icsmon/types.hpp"

namespace icsmon {

/// L2-L4 decode of one captured Ethernet frame, before host anonymization.
struct decoded_frame {
  bool has_ipv4 = false;
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  transport tr = transport::other;
  uint8_t ip_proto = 0;
  uint8_t tcp_flags = 0;
  size_t payload_offset = 0; // where the L4 payload starts in the frame
};

/// Decode Ethernet (one optional 802.1Q tag) / IPv4 / TCP|UDP|ICMP headers.
/// Non-IPv4 frames decode to transport `other` with ports 0. Returns nullopt
/// only for frames the pipeline rejects outright (runt frames, stacked VLANs).
std::optional<decoded_frame> parse_ethernet(const std::vector<uint8_t>& frame);

/// Frame builders emit minimal valid frames (correct lengths and checksums).
std::vector<uint8_t> build_tcp_frame(uint32_t src_ip, uint16_t src_port,
                                     uint32_t dst_ip, uint16_t dst_port,
                                     uint8_t tcp_flags,
                                     const std::vector<uint8_t>& payload,
                                     uint32_t seq = 0, uint32_t ack = 0);

std::vector<uint8_t> build_udp_frame(uint32_t src_ip, uint16_t src_port,
                                     uint32_t dst_ip, uint16_t dst_port,
                                     const std::vector<uint8_t>& payload);

std::vector<uint8_t> build_icmp_frame(uint32_t src_ip, uint32_t dst_ip,
                                      uint8_t type, uint8_t code);

std::vector<uint8_t> build_arp_frame();

/// RFC 1071 one's-complement checksum over `len` bytes.
uint16_t internet_checksum(const uint8_t* data, size_t len, uint32_t seed = 0);

} // namespace icsmon
