#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "icsmon/asmap.hpp"
#include "icsmon/pseudonym.hpp"
#include "icsmon/sflow.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

constexpr uint32_t default_snaplen = 128;
constexpr uint32_t default_sample_rate = 4096;
constexpr uint16_t sflow_default_port = 6343;

/// Turns captured frames into sampled_packets: decodes headers, truncates to
/// the snap length, tags both endpoints with AS data, and replaces addresses
/// with pseudonyms.
class packet_tagger {
 public:
  packet_tagger(const pseudonymizer& pseud, const as_map& asmap,
                uint32_t snaplen = default_snaplen)
      : pseud_(pseud), asmap_(asmap), snaplen_(snaplen) {}

  sampled_packet tag(const std::vector<uint8_t>& frame, int64_t ts_sec,
                     uint32_t ts_nsec, uint32_t original_len, uint32_t rate,
                     const std::string& agent) const;

 private:
  host_id tag_host(uint32_t ip) const;

  const pseudonymizer& pseud_;
  const as_map& asmap_;
  uint32_t snaplen_;
};

/// Read a pcap file, tagging every Ethernet frame. pcap carries no sampling
/// rate, so `rate` is attached to each packet. Returns false on open/parse
/// failure with the reason in `error`.
bool ingest_pcap(const std::string& path, const packet_tagger& tagger,
                 uint32_t rate, const std::string& agent,
                 std::vector<sampled_packet>& out, ingest_stats& stats,
                 std::string* error = nullptr);

/// Decode one sFlow datagram and tag every extracted frame. Timestamps are
/// supplied by the caller (arrival time); sFlow samples carry none.
void ingest_sflow_datagram(const uint8_t* data, size_t len,
                           const packet_tagger& tagger, int64_t ts_sec,
                           uint32_t ts_nsec, std::vector<sampled_packet>& out,
                           ingest_stats& stats);

/// Read a file of sFlow datagrams, each prefixed with a 32-bit big-endian
/// length. Datagram index doubles as the timestamp when none is available.
bool ingest_sflow_file(const std::string& path, const packet_tagger& tagger,
                       std::vector<sampled_packet>& out, ingest_stats& stats,
                       std::string* error = nullptr);

/// Write datagrams in the same length-prefixed format.
bool write_sflow_file(const std::string& path,
                      const std::vector<std::vector<uint8_t>>& datagrams);

/// Blocking UDP collector. Invokes `on_datagram` for each received datagram
/// and returns after `max_datagrams` (0 = until recv fails). Returns the
/// number of datagrams received, or -1 if the socket could not be opened.
int64_t listen_sflow(uint16_t port, uint64_t max_datagrams,
                     const std::function<void(const std::vector<uint8_t>&,
                                              int64_t, uint32_t)>& on_datagram,
                     std::string* error = nullptr);

} // namespace icsmon
