#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace icsmon {

// TCP flag bits as they appear in the TCP header flags octet.
namespace tcpflag {
constexpr uint8_t fin = 0x01;
constexpr uint8_t syn = 0x02;
constexpr uint8_t rst = 0x04;
constexpr uint8_t psh = 0x08;
constexpr uint8_t ack = 0x10;
constexpr uint8_t urg = 0x20;
} // namespace tcpflag

enum class transport : uint8_t { tcp, udp, icmp, other };

std::string to_string(transport t);

/// An IXP-area host after AS tagging and pseudonymization. The original IP
/// is not kept; `pseudonym` is stable for one key and empty for non-IP frames.
struct host_id {
  std::string pseudonym;
  uint32_t asn = 0; // 0 = unknown
  bool in_ixp_area = false;

  bool operator==(const host_id& other) const {
    return pseudonym == other.pseudonym;
  }
  bool operator<(const host_id& other) const {
    return pseudonym < other.pseudonym;
  }
};

/// One sampled, truncated frame with decoded L2-L4 headers.
///
/// `payload` holds the captured transport-layer payload prefix, which is
/// whatever survived the 128-byte frame cap. `captured_len` is the full
/// captured frame length (headers included) and never exceeds 128;
/// `original_len` is the on-the-wire frame length when known (0 otherwise).
struct sampled_packet {
  int64_t ts_sec = 0;
  uint32_t ts_nsec = 0;
  host_id src;
  host_id dst;
  uint16_t src_port = 0; // 0 when transport is not TCP/UDP
  uint16_t dst_port = 0;
  transport tr = transport::other;
  uint8_t ip_proto = 0; // raw IPv4 protocol number, 0 for non-IP frames
  uint8_t tcp_flags = 0;
  std::vector<uint8_t> payload;
  uint16_t captured_len = 0;
  uint32_t original_len = 0;
  uint32_t rate_reciprocal = 1; // 4096 for a 2^-12 sampling rate
  std::string agent;

  double timestamp() const {
    return double(ts_sec) + double(ts_nsec) * 1e-9;
  }
  bool is_truncated() const {
    return original_len > captured_len;
  }
};

/// Direction-free conversation key: both directions of a conversation map to
/// the same key because endpoints are ordered by (pseudonym, port).
struct flow_key {
  std::string lo_host;
  uint16_t lo_port = 0;
  std::string hi_host;
  uint16_t hi_port = 0;
  transport tr = transport::other;

  bool operator==(const flow_key& o) const {
    return lo_host == o.lo_host && lo_port == o.lo_port &&
           hi_host == o.hi_host && hi_port == o.hi_port && tr == o.tr;
  }
  bool operator<(const flow_key& o) const {
    return std::tie(lo_host, lo_port, hi_host, hi_port, tr) <
           std::tie(o.lo_host, o.lo_port, o.hi_host, o.hi_port, o.tr);
  }
};

flow_key make_flow_key(const sampled_packet& pkt);

struct flow_key_hash {
  size_t operator()(const flow_key& k) const;
};

} // namespace icsmon
