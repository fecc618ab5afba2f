#pragma once

#include <optional>
#include <string_view>

#include "icsmon/types.hpp"

namespace icsmon {

/// Non-industrial traffic labels. The first twelve are positive
/// recognitions; GenericTcp/GenericUdp/Icmp/Other are transport fallbacks
/// used when nothing specific matches.
enum class it_label : uint8_t {
  tls,
  http,
  dns,
  stun,
  xmpp,
  sip,
  openvpn,
  rtcp,
  ftp,
  telnet,
  bittorrent,
  ssh,
  generic_tcp,
  generic_udp,
  icmp,
  other,
};

std::string_view to_string(it_label l);
std::optional<it_label> parse_it_label(std::string_view name);

/// True for the twelve positive recognitions; false for the fallbacks.
/// Only a specific label counts as "confidently non-industrial" when
/// cross-validating dissected traffic.
bool is_specific(it_label l);

/// Cheap port + payload-prefix heuristics. Deliberately conservative: a miss
/// falls back to GenericTcp/GenericUdp/Icmp/Other rather than guessing.
it_label recognize_it(const sampled_packet& pkt);

} // namespace icsmon
