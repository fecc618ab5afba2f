#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsmon/stats.hpp"
#include "icsmon/types.hpp"

namespace icsmon {

enum class txn_kind : uint8_t {
  modbus_write_single_register, // request, response, bare ACK
  mqtt_publish,                 // publish, bare ACK
  custom,                       // one opaque packet on an unregistered port
};

struct profile_entry {
  txn_kind kind = txn_kind::modbus_write_single_register;
  double rate_per_second = 0;      // transactions per second
  uint16_t custom_payload_bytes = 8; // custom kind only
};

/// A synthetic client inside the exchange area talking to a server outside
/// it. Register values, topics and custom payloads derive from `seed`;
/// handshakes are taken as already established and never emitted.
struct traffic_profile {
  std::vector<profile_entry> transactions;
  uint32_t duration_seconds = 0; // zero yields an empty stream
  double direction_mix = 0.5;    // custom packets: probability of "outgoing"
  uint64_t seed = 0;
  std::string client_ip = "203.0.113.77";
  std::string server_ip = "192.0.2.200";
  int64_t epoch = 1578960000;
};

/// 10 Modbus write transactions and 10 MQTT publishes per second for 24
/// hours: 1,728,000 transactions, 4,320,000 packets, 2,592,000 outgoing.
traffic_profile reference_profile(uint64_t seed = 0);

enum class packet_kind : uint8_t {
  modbus_request,
  modbus_response,
  modbus_ack,
  mqtt_publish,
  mqtt_ack,
  custom,
};

std::string_view to_string(packet_kind k);

struct packet_descriptor {
  uint64_t index = 0;       // position in the generated stream
  uint32_t entry = 0;       // profile entry this packet belongs to
  uint64_t transaction = 0; // per-entry transaction ordinal
  packet_kind kind = packet_kind::custom;
  bool outgoing = true;     // client-to-server
  int64_t ts_sec = 0;
  uint32_t ts_nsec = 0;

  /// True when the packet carries an industrial PDU (bare ACKs and custom
  /// background packets do not).
  bool carries_pdu() const {
    return kind == packet_kind::modbus_request ||
           kind == packet_kind::modbus_response ||
           kind == packet_kind::mqtt_publish;
  }
};

/// Deterministic packet stream for one profile. Descriptors are enumerated
/// without materializing frames, so day-long profiles stay cheap; frame
/// bytes are built on demand for the few packets that survive sampling.
class traffic_generator {
public:
  /// Throws std::invalid_argument on non-positive rates, a direction mix
  /// outside [0, 1], or unparseable endpoint addresses.
  explicit traffic_generator(traffic_profile profile);

  const traffic_profile& profile() const { return profile_; }
  uint32_t client_ip() const { return client_ip_; }
  uint32_t server_ip() const { return server_ip_; }

  uint64_t transactions_of(size_t entry) const;
  uint64_t total_transactions() const;
  uint64_t total_packets() const { return total_packets_; }
  uint64_t outgoing_packets() const;

  /// Enumerates the stream in emission order (by second, then profile entry,
  /// then transaction). Return false from `fn` to stop early.
  void for_each(const std::function<bool(const packet_descriptor&)>& fn) const;

  /// Transport payload of one packet; empty for bare ACKs.
  std::vector<uint8_t> payload(const packet_descriptor& d) const;

  /// Minimal Ethernet/IPv4/TCP frame for one packet.
  std::vector<uint8_t> frame(const packet_descriptor& d) const;

private:
  uint64_t txns_before(size_t entry, uint32_t second) const;

  traffic_profile profile_;
  uint32_t client_ip_ = 0;
  uint32_t server_ip_ = 0;
  uint64_t total_packets_ = 0;
};

enum class sampling_mode : uint8_t {
  bernoulli,               // i.i.d. with probability 1/rate_reciprocal
  deterministic_every_nth, // every rate_reciprocal-th eligible packet
};

std::optional<sampling_mode> parse_sampling_mode(std::string_view name);

struct sampler_config {
  uint32_t rate_reciprocal = 4096;
  sampling_mode mode = sampling_mode::bernoulli;
  bool sample_outgoing_only = true;
};

struct sample_counts {
  uint64_t eligible = 0;
  uint64_t sampled = 0;
};

/// The per-packet Bernoulli draw: a keyed hash of the packet index taken
/// modulo the rate. Stateless, so any time window can be resampled alone.
bool bernoulli_take(uint64_t seed, uint64_t index, uint32_t rate_reciprocal);

/// Thins the generated stream. Only packets in the eligible direction are
/// considered; `on_sample` receives the survivors in stream order.
/// Throws std::invalid_argument when the rate reciprocal is zero.
sample_counts sample_stream(
    const traffic_generator& gen, const sampler_config& cfg, uint64_t seed,
    const std::function<void(const packet_descriptor&)>& on_sample);

/// Bernoulli (or every-nth) thinning over a bare index range.
uint64_t sample_count(uint64_t eligible, const sampler_config& cfg,
                      uint64_t seed);

/// Writes the complete stream as a pcap capture; returns the packet count.
/// Throws std::runtime_error when the file cannot be written.
uint64_t write_stream_pcap(const traffic_generator& gen,
                           const std::string& path);

/// Samples the stream and writes the survivors as length-prefixed sFlow v5
/// datagrams, the raw-capture format the ingest side reads back directly.
sample_counts write_sampled_sflow(const traffic_generator& gen,
                                  const sampler_config& cfg, uint64_t seed,
                                  const std::string& path);

struct validation_options {
  uint64_t sampler_seed = 1;
  /// Route sampled frames through an sFlow encode/decode round trip instead
  /// of handing them to the tagger directly.
  bool through_sflow = true;
  /// Client/server addresses to mark as known scanners before classifying.
  std::vector<std::string> scanner_ips;
  double max_ratio_sigmas = 4.0;
};

struct validation_report {
  uint64_t total_packets = 0;
  uint64_t eligible_packets = 0;
  uint64_t sampled_packets = 0;
  uint64_t sampled_modbus_requests = 0;
  uint64_t sampled_modbus_acks = 0;
  uint64_t sampled_mqtt_publishes = 0;
  uint64_t sampled_other = 0;

  uint64_t pdu_packets = 0;     // sampled packets carrying an industrial PDU
  uint64_t pdu_well_formed = 0; // of those, dissected well-formed
  uint64_t pdu_legitimate = 0;  // classified LegitimateICS
  uint64_t pdu_scanner = 0;     // classified IcsScanner

  double expected_ratio = 0; // 1 / rate_reciprocal
  double observed_ratio = 0; // sampled / eligible
  sample_bounds bounds;      // count bounds at max_ratio_sigmas
  double deviation_sigmas = 0;

  bool dissection_ok = false;     // every PDU packet well-formed
  bool classification_ok = false; // every PDU packet LegitimateICS
  bool ratio_ok = false;          // sampled count inside the bounds
  bool passed = false;
};

/// Generate, sample, optionally round-trip through sFlow, then classify with
/// a frozen intel snapshot built from `scanner_ips`. The report carries the
/// per-kind sampled counts and the sampling-ratio deviation.
validation_report validate_end_to_end(const traffic_profile& profile,
                                      const sampler_config& cfg,
                                      const validation_options& opts = {});

} // namespace icsmon
