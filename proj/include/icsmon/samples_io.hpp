#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "icsmon/types.hpp"

namespace icsmon {

/// Sample interchange format: one JSON object per line.
///
/// Fields: ts_sec, ts_nsec, src/dst {pseudonym, asn, in_area}, src_port,
/// dst_port, transport ("tcp"|"udp"|"icmp"|"other"), ip_proto, tcp_flags,
/// payload (lowercase hex, omitted when empty), captured_len, original_len,
/// rate, agent (omitted when empty).
void write_samples(std::ostream& os, const std::vector<sampled_packet>& pkts);
bool write_samples_file(const std::string& path,
                        const std::vector<sampled_packet>& pkts);

/// Strict reader: any malformed line aborts with `error` set and returns
/// false. Empty lines are permitted.
bool read_samples(std::istream& is, std::vector<sampled_packet>& out,
                  std::string* error = nullptr);
bool read_samples_file(const std::string& path,
                       std::vector<sampled_packet>& out,
                       std::string* error = nullptr);

std::string to_hex(const std::vector<uint8_t>& bytes);
bool from_hex(const std::string& hex, std::vector<uint8_t>& out);

} // namespace icsmon
