#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>

namespace icsmon {

struct as_info {
  uint32_t asn = 0;
  bool in_ixp_area = false;
};

/// CIDR-prefix to AS mapping with longest-prefix-match lookup.
/// File format: one record per line, "CIDR-prefix, ASN, in_ixp_area(0/1)".
class as_map {
public:
  as_map() = default;

  static as_map from_file(const std::string& path);
  static as_map from_text(std::istream& in);

  void add(uint32_t prefix, int prefix_len, uint32_t asn, bool area);

  /// Longest-prefix match; unmatched addresses get {asn 0, area false}.
  as_info lookup(uint32_t ip) const;

  size_t size() const { return count_; }

private:
  // one exact-match table per prefix length, probed from /32 down
  std::unordered_map<uint32_t, as_info> tables_[33];
  size_t count_ = 0;
};

} // namespace icsmon
