#pragma once

#include <optional>
#include <string_view>

#include "icsmon/registry.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

/// Scanning-probe shapes, judged per packet. ProtocolSpecificRequest covers
/// the six known scanner payloads (BACnet readProperty, CoAP GET
/// /.well-known/core, Ethernet/IP List Identity, HART-IP Session Initiate,
/// OMRON FINS Controller Data Read, ATG I20100). RstOnly and
/// EstablishedHandshake are matched for reporting but never by themselves
/// mark a host as a scanner.
enum class probe_kind : uint8_t {
  none,
  protocol_specific_request,
  syn_only,
  rst_only,
  udp_probe,
  established_handshake,
};

std::string_view to_string(probe_kind k);
std::optional<probe_kind> parse_probe_kind(std::string_view name);

/// True for the shapes that tag the source host as a scanner.
bool is_scanner_probe(probe_kind k);

/// Match one packet against the probe catalogue for one candidate protocol.
/// Protocol-specific payload patterns are tried first, then the
/// transport-level shapes.
probe_kind match_probe(const sampled_packet& pkt, protocol_id candidate);

} // namespace icsmon
