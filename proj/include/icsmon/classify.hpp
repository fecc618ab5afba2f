#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icsmon/intel.hpp"
#include "icsmon/registry.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

enum class verdict_label : uint8_t {
  legitimate_ics,
  ics_scanner,
  non_ics,
  indeterminate,
};

std::string_view to_string(verdict_label l);
std::optional<verdict_label> parse_verdict_label(std::string_view name);

/// Pipeline-stage tags, recorded in the order the stages fired.
enum class basis_tag : uint8_t {
  port_match,
  dissect_ok,
  cross_validated,
  intel_scanner,
  probe_signature,
  it_recognized,
};

std::string_view to_string(basis_tag t);

struct verdict {
  uint64_t packet_index = 0;
  verdict_label label = verdict_label::non_ics;
  std::optional<protocol_id> protocol;
  std::vector<basis_tag> basis;

  bool has(basis_tag t) const;
};

/// Packet counters mirroring the step-by-step filtering report.
struct pipeline_accounting {
  uint64_t total = 0;
  uint64_t after_port_filter = 0;
  uint64_t s1_dissected = 0;
  uint64_t s1_crossvalidated = 0;
  uint64_t s1_scanner = 0;
  uint64_t s1_legitimate = 0;
  uint64_t s2_residual = 0;
  uint64_t s2_crossvalidated = 0;
  uint64_t s2_scanner = 0;
  uint64_t s3_total_scanners = 0;
  uint64_t s3_total_ics = 0;

  bool identities_hold() const;
};

/// What may promote a residual packet to IcsScanner. Intel tags always
/// qualify; probe signatures are opt-out.
enum class scanner_basis : uint8_t { intel, intel_and_signatures };

std::optional<scanner_basis> parse_scanner_basis(std::string_view name);

struct classify_options {
  scanner_basis basis = scanner_basis::intel_and_signatures;
};

struct classify_result {
  std::vector<verdict> verdicts; // one per input packet, in input order
  pipeline_accounting accounting;
};

/// Runs the full three-step pipeline over a packet batch.
/// Throws std::logic_error if the final labels fail to partition the
/// port-matched set (internal consistency check).
classify_result classify_packets(const std::vector<sampled_packet>& packets,
                                 const protocol_registry& registry,
                                 const intel_db& intel,
                                 const classify_options& opts = {});

struct host_role {
  std::string host;
  std::set<protocol_id> protocols_legitimate;
  std::set<protocol_id> protocols_scanned;
  bool has_it_traffic = false;
};

/// Aggregates verdicts into per-host roles. Hosts enter the list when they
/// take part in ICS traffic (legitimate endpoints on either side, scan
/// sources). `min_rate_per_min` > 0 drops hosts whose estimated original
/// packet rate (sampled count scaled by the sampling rate over the capture
/// window) stays below the threshold.
std::vector<host_role> host_roles(const std::vector<sampled_packet>& packets,
                                  const std::vector<verdict>& verdicts,
                                  double min_rate_per_min = 0.0);

} // namespace icsmon
