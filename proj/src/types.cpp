#include "icsmon/types.hpp"

namespace icsmon {

std::string to_string(transport t) {
  switch (t) {
    case transport::tcp:
      return "tcp";
    case transport::udp:
      return "udp";
    case transport::icmp:
      return "icmp";
    default:
      return "other";
  }
}

flow_key make_flow_key(const sampled_packet& pkt) {
  flow_key k;
  k.tr = pkt.tr;
  auto a = std::make_pair(pkt.src.pseudonym, pkt.src_port);
  auto b = std::make_pair(pkt.dst.pseudonym, pkt.dst_port);
  if (b < a)
    std::swap(a, b);
  k.lo_host = a.first;
  k.lo_port = a.second;
  k.hi_host = b.first;
  k.hi_port = b.second;
  return k;
}

size_t flow_key_hash::operator()(const flow_key& k) const {
  std::hash<std::string> hs;
  size_t h = hs(k.lo_host);
  h = h * 1315423911u ^ hs(k.hi_host);
  h = h * 1315423911u ^ (size_t(k.lo_port) << 17 | k.hi_port);
  h = h * 1315423911u ^ size_t(k.tr);
  return h;
}

} // namespace icsmon
