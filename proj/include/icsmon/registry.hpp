#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsmon/types.hpp"

namespace icsmon {

/// The 28 tracked industrial protocols. Closed set: entries are created at
/// startup from the built-in catalog (or a replacement file) and never at
/// runtime.
enum class protocol_id : uint8_t {
  amqp,
  ansi_c1222,
  atg,
  bacnet_ip,
  coap,
  codesys,
  crimson_v3,
  dnp3,
  ethercat,
  ethernet_ip,
  fl_net,
  ff_hse,
  ge_srtp,
  hart_ip,
  iccp,
  iec104,
  iec61850,
  modbus_tcp,
  melsec_q,
  mqtt,
  niagara_fox,
  omron_fins,
  opc_ua,
  pcworx,
  proconos,
  profinet,
  s7comm,
  zigbee_ip,
};

constexpr size_t protocol_count = 28;

std::string_view protocol_name(protocol_id p);

/// Accepts canonical names plus common lowercase aliases as used in scan
/// export tags ("modbus", "s7", "fox", "iec-60870-5-104", ...).
std::optional<protocol_id> parse_protocol(std::string_view name);

/// Reporting group label. ICCP, IEC61850 and S7comm share TCP port 102 and
/// cannot be told apart by port, so reports aggregate them into one group.
std::string_view report_group(protocol_id p);

/// All distinct report group labels, in catalog order.
std::vector<std::string> all_report_groups();

enum class dissector_tier : uint8_t { full, port_only };

struct port_range {
  uint16_t lo = 0;
  uint16_t hi = 0;

  bool contains(uint16_t port) const { return port >= lo && port <= hi; }
};

struct registry_entry {
  protocol_id protocol{};
  std::vector<port_range> tcp_ports;
  std::vector<port_range> udp_ports;
  std::vector<uint16_t> secure_ports; // transport-encrypted variants
  dissector_tier tier = dissector_tier::port_only;

  bool has_port(uint16_t port, transport tr) const;
};

/// Read-only protocol/port catalog. Built once, then shared by readers.
class protocol_registry {
public:
  /// The built-in catalog of all 28 protocols with their reference ports.
  static const protocol_registry& builtin();

  /// Parse a replacement catalog; one record per line:
  ///   name|tcp_ranges|udp_ranges|secure_ports|tier
  /// with ranges "502" or "1089-1091" comma separated, "-" for none,
  /// tier "full" or "port-only". '#' starts a comment.
  static protocol_registry from_text(std::istream& in);
  static protocol_registry from_file(const std::string& path);

  /// Every protocol whose port range for `tr` contains `port`.
  std::vector<protocol_id> lookup(uint16_t port, transport tr) const;

  /// True iff `port` designates the protocol's transport-encrypted variant.
  /// Throws std::domain_error when the port is outside the protocol's ranges.
  bool is_secure_port(protocol_id p, uint16_t port) const;

  const registry_entry& entry(protocol_id p) const;
  const std::vector<registry_entry>& entries() const { return entries_; }

  /// True when any side of src/dst ports matches an ICS range for `tr`.
  bool port_matches(uint16_t src_port, uint16_t dst_port, transport tr) const;

  void dump(std::ostream& out) const;

private:
  std::vector<registry_entry> entries_; // indexed by protocol_id
};

} // namespace icsmon
