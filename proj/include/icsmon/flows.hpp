#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "icsmon/classify.hpp"
#include "icsmon/itproto.hpp"
#include "icsmon/registry.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

/// Flow label: a dissected industrial protocol when any packet of the flow
/// validated, otherwise the non-industrial recognizer result.
using flow_label = std::variant<it_label, protocol_id>;

struct flow_record {
  flow_key key;
  uint64_t packet_count = 0;
  int64_t first_seen = 0;
  int64_t last_seen = 0;
  flow_label label = it_label::other;
  std::optional<std::string> iana_service;
};

/// Human-readable label before any IANA mapping.
std::string label_name(const flow_label& l);

struct flow_options {
  /// Idle gap (seconds) above which a conversation splits into a new flow.
  int64_t idle_timeout_seconds = 300;
};

/// Groups packets into direction-free flows with an idle-timeout split.
/// The flow label is the most specific result seen across its packets:
/// dissected industrial protocol, then positive IT recognition, then the
/// transport fallback. Σ packet_count over the result equals packets.size().
std::vector<flow_record> aggregate(const std::vector<sampled_packet>& packets,
                                   const protocol_registry& registry,
                                   const flow_options& opts = {});

/// "port,transport,service" table; a frozen subset of the IANA registry
/// ships as a test fixture and the full file imports the same way.
class iana_services {
 public:
  static iana_services from_stream(std::istream& in);
  static iana_services from_file(const std::string& path);

  std::optional<std::string> lookup(uint16_t port, transport tr) const;
  size_t size() const { return table_.size(); }

 private:
  std::map<std::pair<uint16_t, uint8_t>, std::string> table_;
};

/// Service of the numerically smaller port of the pair, when registered.
/// None when that port is unregistered or both ports are ephemeral (>=49152).
/// Direction-free by construction.
std::optional<std::string> map_iana(const flow_record& flow,
                                    const iana_services& services);

/// Fills iana_service on every record.
void apply_iana(std::vector<flow_record>& flows, const iana_services& services);

enum class share_basis : uint8_t { packet_based, flow_based };
enum class iana_mapping : uint8_t { before_iana, after_iana };

std::string_view to_string(share_basis b);
std::string_view to_string(iana_mapping m);

struct traffic_breakdown {
  share_basis basis = share_basis::packet_based;
  iana_mapping mapping = iana_mapping::before_iana;
  std::vector<std::pair<std::string, double>> shares; // label, percent
};

/// One quadrant of the packet-based / flow-based x before / after table.
/// Packet basis weights flows by packet_count; flow basis counts each flow
/// once. After-IANA renames only transport fallbacks that mapped to a
/// registered service; positive recognitions keep their protocol name.
/// Shares are percentages of the whole population, sorted descending
/// (name ascending on ties) and truncated to top_k (0 = no truncation).
traffic_breakdown breakdown(const std::vector<flow_record>& flows,
                            share_basis basis, iana_mapping mapping,
                            size_t top_k = 5);

struct coexistence_report {
  uint64_t ics_hosts = 0;
  uint64_t ics_hosts_with_it = 0;
  double ics_host_share_pct = 0.0;
  uint64_t legitimate_pairs = 0;
  uint64_t legitimate_pairs_with_it = 0;
  double legitimate_pair_share_pct = 0.0;
  /// Hosts speaking a legitimate industrial protocol next to IT traffic:
  /// possible NAT or multi-service endpoints.
  std::vector<std::string> nat_suspects;
};

/// How much industrial infrastructure also carries non-industrial traffic,
/// per host and per legitimate conversation pair.
coexistence_report it_coexistence(const std::vector<host_role>& roles,
                                  const std::vector<sampled_packet>& packets,
                                  const std::vector<verdict>& verdicts);

} // namespace icsmon
