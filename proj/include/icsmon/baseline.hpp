#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "icsmon/asmap.hpp"
#include "icsmon/classify.hpp"
#include "icsmon/pseudonym.hpp"
#include "icsmon/registry.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

/// One host from an active-scan export after pseudonymization. Protocols
/// come from the documented port map and explicit tags; banners are never
/// interpreted, with the single exception of the ATG "I20100" marker.
struct baseline_host {
  host_id host;
  std::set<protocol_id> protocols;
  std::set<std::pair<uint16_t, transport>> open_ports;
  std::vector<std::string> products;
  std::vector<std::pair<std::string, double>> cves; // (cve id, CVSS v2)
};

struct baseline_import_options {
  /// Drop hosts outside the exchange-point area (the paper's AS filter).
  bool area_only = false;
};

struct baseline_import_result {
  std::vector<baseline_host> hosts;
  std::vector<std::string> errors; // "line N: reason", one per bad record
  uint64_t records_seen = 0;
  uint64_t records_dropped_area = 0;
};

/// Reads a newline-delimited export of scan records (a neutral re-encoding
/// of Shodan host objects; see docs/FORMATS.md). Bad records are reported
/// and skipped, never fatal. Records sharing an IP merge into one host.
baseline_import_result import_baseline(std::istream& in, const as_map& amap,
                                       const pseudonymizer& ps,
                                       const protocol_registry& registry,
                                       const baseline_import_options& opts = {});

baseline_import_result import_baseline_file(const std::string& path,
                                            const as_map& amap,
                                            const pseudonymizer& ps,
                                            const protocol_registry& registry,
                                            const baseline_import_options& opts = {});

struct protocol_comparison {
  uint64_t h = 0;   // passively observed hosts
  uint64_t h_s = 0; // baseline hosts
  uint64_t i = 0;   // common hosts
};

/// Per-report-group counts plus deduplicated overall counts. Overall rows
/// are computed from the data, never copied from a reference table.
struct baseline_comparison {
  std::map<std::string, protocol_comparison> per_protocol;
  uint64_t unique_h = 0;
  uint64_t unique_h_s = 0;
  uint64_t unique_i = 0;
};

/// Passive side counts hosts by their legitimate protocols; scanner-only
/// hosts do not represent exposed industrial endpoints. Port-102 protocols
/// fold into their shared report group on both sides.
baseline_comparison compare(const std::vector<host_role>& observed,
                            const std::vector<baseline_host>& baseline);

enum class severity_bucket : uint8_t { low, medium, high };

std::string_view to_string(severity_bucket b);

/// CVSS v2 thresholds: [0.0,3.9] low, [4.0,6.9] medium, [7.0,10.0] high.
/// Throws std::out_of_range outside [0, 10].
severity_bucket cvss_bucket(double score);

struct exposure_report {
  uint64_t observed_hosts = 0;         // legitimate ICS hosts considered
  uint64_t identified = 0;             // of those, present in the baseline
  double identified_pct = 0.0;
  uint64_t with_ics_ports = 0;         // identified hosts exposing an ICS port
  double with_ics_ports_pct = 0.0;     // share of identified hosts
  std::vector<std::pair<std::string, double>> top_products; // % of identified
  std::vector<std::pair<std::string, double>> top_ports;    // "502/tcp", %
  uint64_t cve_total = 0;
  uint64_t hosts_with_cves = 0;
  std::map<severity_bucket, uint64_t> cve_buckets;
};

/// What the scan service knew about the hosts we saw communicating
/// legitimately: identification rate, exposed ports/products, CVE severity.
exposure_report exposure(const std::vector<host_role>& observed,
                         const std::vector<baseline_host>& baseline,
                         const protocol_registry& registry,
                         size_t top_k = 5);

} // namespace icsmon
