#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icsmon {

/// One raw-packet-header record extracted from an sFlow v5 flow sample.
struct sflow_record {
  uint32_t sample_rate = 1;
  uint32_t sample_pool = 0;
  uint32_t frame_length = 0; // original frame length on the wire
  std::vector<uint8_t> header; // truncated frame bytes as exported
};

struct ingest_stats {
  uint64_t datagrams = 0;
  uint64_t bad_datagrams = 0;
  uint64_t samples_seen = 0;    // flow samples only
  uint64_t samples_decoded = 0; // yielded at least one raw Ethernet header
  uint64_t samples_rejected = 0;
  uint64_t counter_samples_skipped = 0;
  uint64_t records_skipped = 0; // non raw-header records inside flow samples
  uint64_t bytes_read = 0;
};

/// Decode one sFlow v5 datagram. Understands flow samples (format 1) and
/// expanded flow samples (format 3) carrying raw packet header records
/// (format 1, header protocol Ethernet). Counter samples and unknown record
/// types are skipped and counted. Returns the extracted records; `agent_out`
/// receives the agent address in dotted form (IPv6 agents render as hex).
std::vector<sflow_record> decode_sflow_datagram(const uint8_t* data, size_t len,
                                                ingest_stats& stats,
                                                std::string* agent_out = nullptr);

struct sflow_sample_spec {
  uint32_t sequence = 0;
  uint32_t source_index = 0;
  uint32_t sample_rate = 4096;
  uint32_t sample_pool = 0;
  uint32_t drops = 0;
  uint32_t frame_length = 0; // defaults to header size when 0
  bool expanded = false;     // emit format 3 instead of format 1
  std::vector<uint8_t> header;
};

/// Build an sFlow v5 datagram with an IPv4 agent address.
std::vector<uint8_t> encode_sflow_datagram(uint32_t agent_ipv4,
                                           uint32_t sub_agent,
                                           uint32_t sequence, uint32_t uptime_ms,
                                           const std::vector<sflow_sample_spec>& samples);

} // namespace icsmon
