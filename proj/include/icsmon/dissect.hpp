#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "icsmon/registry.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

/// Outcome of validating one payload as a single PDU of one protocol.
///
/// The dissectors accept prefixes: a payload that is valid as far as the
/// capture goes but whose declared body extends past the truncation point is
/// WellFormed. Bytes left over after one complete PDU make it Malformed.
/// A capture cut off inside the minimal header is InsufficientData, never
/// Malformed. NotApplicable is reserved for wrong-protocol traffic on shared
/// ports (the port 102 family).
enum class dissect_result : uint8_t {
  well_formed,
  malformed,
  insufficient_data,
  not_applicable,
};

std::string_view to_string(dissect_result r);

/// CRC-16 as used by DNP3 link-layer blocks (reflected 0x3D65, complemented).
uint16_t crc16_dnp(const uint8_t* data, size_t len);

/// Validate `payload` as one PDU of `proto` seen on `port`/`tr`.
/// `proto` must be a full-tier protocol; throws std::invalid_argument for
/// port-only tiers, which have no dissector.
dissect_result dissect(protocol_id proto, const std::vector<uint8_t>& payload,
                       transport tr, uint16_t port = 0);

struct dissection {
  protocol_id proto{};
  uint16_t port = 0; // the port that matched the registry
  dissect_result result = dissect_result::not_applicable;
};

/// Run every registered candidate dissector against the packet payload.
/// Candidates are the protocols whose port ranges contain the destination or
/// source port for the packet's transport (destination side listed first).
/// Port-only candidates appear with result NotApplicable.
std::vector<dissection> dissect_packet(const sampled_packet& pkt,
                                       const protocol_registry& reg);

/// True when any candidate dissected WellFormed.
bool any_well_formed(const std::vector<dissection>& ds);

} // namespace icsmon
