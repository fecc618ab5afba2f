#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icsmon/pseudonym.hpp"

namespace icsmon {

enum class intel_class : uint8_t { unknown, benign, malicious };

std::string_view to_string(intel_class c);
std::optional<intel_class> parse_intel_class(std::string_view name);

struct intel_record {
  std::string host; // pseudonym after loading
  intel_class cls = intel_class::unknown;
  std::string actor;      // empty: unknown
  std::string country;    // ISO 3166 alpha-2, empty: unknown
  std::string last_seen;  // ISO 8601; lexicographic order is time order
  std::string provenance; // required for benign/malicious verdicts
};

/// Frozen scanner-intelligence snapshot loaded from a JSONL file. One object
/// per line with fields host, classification, actor, country, last_seen,
/// provenance. The host may be a raw IPv4 address, which is pseudonymized at
/// load when a pseudonymizer is supplied, so lookups from the packet pipeline
/// always hit. Duplicate hosts keep the record with the latest last_seen.
class intel_db {
public:
  intel_db() = default;

  static intel_db from_stream(std::istream& in, const pseudonymizer* pseud,
                              std::vector<std::string>* errors = nullptr);
  static intel_db from_file(const std::string& path, const pseudonymizer* pseud,
                            std::vector<std::string>* errors = nullptr);

  /// Merge one record under the latest-last_seen rule. Returns false and
  /// leaves the db unchanged when the record violates the provenance
  /// invariant (benign/malicious verdicts need a provenance note).
  bool add(intel_record rec);

  const intel_record* lookup(const std::string& host) const;
  bool contains(const std::string& host) const { return lookup(host); }
  size_t size() const { return records_.size(); }
  const std::unordered_map<std::string, intel_record>& records() const {
    return records_;
  }

private:
  std::unordered_map<std::string, intel_record> records_;
};

struct actor_share {
  std::string actor;
  uint64_t hosts = 0;
  double share_pct = 0;
};

struct actor_breakdown_result {
  std::vector<actor_share> top_actors; // descending by host count
  double malicious_pct = 0;
  double benign_pct = 0;
  double unknown_pct = 0;
  uint64_t total_hosts = 0;
};

/// Actor and classification shares over a scanner-host set. Hosts without
/// intel (or without an actor) fall into the "unknown" bucket. top_k 0 keeps
/// every actor.
actor_breakdown_result actor_breakdown(const std::vector<std::string>& hosts,
                                       const intel_db& db, size_t top_k = 0);

/// Country counts over the malicious subset of the given hosts; records
/// without a country count under "??".
std::map<std::string, uint64_t> geo_counts(const std::vector<std::string>& hosts,
                                           const intel_db& db);

} // namespace icsmon
