#include "icsmon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <sodium.h>

#include "icsmon/asmap.hpp"
#include "icsmon/classify.hpp"
#include "icsmon/frame.hpp"
#include "icsmon/ingest.hpp"
#include "icsmon/intel.hpp"
#include "icsmon/pcapio.hpp"
#include "icsmon/pseudonym.hpp"
#include "icsmon/sflow.hpp"

namespace icsmon {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0)
    throw std::runtime_error("libsodium initialization failed");
}

// Counter-based RNG: SipHash-2-4 of (tag, entry, counter) under a key
// expanded from the 64-bit seed. Pure, so streams can be sharded freely.
uint64_t hash64(uint64_t seed, uint8_t tag, uint32_t entry, uint64_t counter) {
  ensure_sodium();
  uint8_t key[crypto_shorthash_KEYBYTES];
  for (int i = 0; i < 8; ++i) {
    key[i] = static_cast<uint8_t>(seed >> (8 * i));
    key[8 + i] = static_cast<uint8_t>((seed ^ 0x9e3779b97f4a7c15ull) >> (8 * i));
  }
  uint8_t msg[13];
  msg[0] = tag;
  for (int i = 0; i < 4; ++i)
    msg[1 + i] = static_cast<uint8_t>(entry >> (8 * i));
  for (int i = 0; i < 8; ++i)
    msg[5 + i] = static_cast<uint8_t>(counter >> (8 * i));
  uint8_t mac[crypto_shorthash_BYTES];
  crypto_shorthash(mac, msg, sizeof msg, key);
  uint64_t out = 0;
  for (int i = 0; i < 8; ++i)
    out |= static_cast<uint64_t>(mac[i]) << (8 * i);
  return out;
}

uint32_t packets_per_txn(txn_kind kind) {
  switch (kind) {
  case txn_kind::modbus_write_single_register:
    return 3;
  case txn_kind::mqtt_publish:
    return 2;
  case txn_kind::custom:
    return 1;
  }
  return 1;
}

packet_kind kind_of(txn_kind kind, uint32_t step) {
  switch (kind) {
  case txn_kind::modbus_write_single_register:
    return step == 0   ? packet_kind::modbus_request
           : step == 1 ? packet_kind::modbus_response
                       : packet_kind::modbus_ack;
  case txn_kind::mqtt_publish:
    return step == 0 ? packet_kind::mqtt_publish : packet_kind::mqtt_ack;
  case txn_kind::custom:
    return packet_kind::custom;
  }
  return packet_kind::custom;
}

constexpr uint16_t modbus_server_port = 502;
constexpr uint16_t mqtt_server_port = 1883;
constexpr uint16_t custom_server_port = 40000;
constexpr uint32_t synth_agent_ip = 0x0a000001; // 10.0.0.1

uint16_t server_port_of(txn_kind kind) {
  switch (kind) {
  case txn_kind::modbus_write_single_register:
    return modbus_server_port;
  case txn_kind::mqtt_publish:
    return mqtt_server_port;
  case txn_kind::custom:
    return custom_server_port;
  }
  return custom_server_port;
}

} // namespace

traffic_profile reference_profile(uint64_t seed) {
  traffic_profile p;
  p.transactions = {
      {txn_kind::modbus_write_single_register, 10.0, 8},
      {txn_kind::mqtt_publish, 10.0, 8},
  };
  p.duration_seconds = 86400;
  p.seed = seed;
  return p;
}

std::string_view to_string(packet_kind k) {
  switch (k) {
  case packet_kind::modbus_request:
    return "modbus-request";
  case packet_kind::modbus_response:
    return "modbus-response";
  case packet_kind::modbus_ack:
    return "modbus-ack";
  case packet_kind::mqtt_publish:
    return "mqtt-publish";
  case packet_kind::mqtt_ack:
    return "mqtt-ack";
  case packet_kind::custom:
    return "custom";
  }
  return "custom";
}

traffic_generator::traffic_generator(traffic_profile profile)
    : profile_(std::move(profile)) {
  for (const profile_entry& e : profile_.transactions) {
    if (!(e.rate_per_second > 0) || !std::isfinite(e.rate_per_second))
      throw std::invalid_argument("transaction rate must be positive");
    if (e.kind == txn_kind::custom && e.custom_payload_bytes == 0)
      throw std::invalid_argument("custom payload must not be empty");
  }
  if (!(profile_.direction_mix >= 0.0) || profile_.direction_mix > 1.0)
    throw std::invalid_argument("direction mix must lie in [0, 1]");
  auto client = parse_ipv4(profile_.client_ip);
  auto server = parse_ipv4(profile_.server_ip);
  if (!client || !server)
    throw std::invalid_argument("endpoint addresses must be dotted IPv4");
  client_ip_ = *client;
  server_ip_ = *server;
  for (size_t e = 0; e < profile_.transactions.size(); ++e)
    total_packets_ +=
        transactions_of(e) * packets_per_txn(profile_.transactions[e].kind);
}

uint64_t traffic_generator::txns_before(size_t entry, uint32_t second) const {
  double r = profile_.transactions[entry].rate_per_second;
  return static_cast<uint64_t>(std::floor(static_cast<double>(second) * r));
}

uint64_t traffic_generator::transactions_of(size_t entry) const {
  return txns_before(entry, profile_.duration_seconds);
}

uint64_t traffic_generator::total_transactions() const {
  uint64_t total = 0;
  for (size_t e = 0; e < profile_.transactions.size(); ++e)
    total += transactions_of(e);
  return total;
}

uint64_t traffic_generator::outgoing_packets() const {
  uint64_t total = 0;
  for (size_t e = 0; e < profile_.transactions.size(); ++e) {
    const profile_entry& entry = profile_.transactions[e];
    uint64_t txns = transactions_of(e);
    switch (entry.kind) {
    case txn_kind::modbus_write_single_register:
      total += txns * 2; // request and ACK leave the area
      break;
    case txn_kind::mqtt_publish:
      total += txns; // only the publish leaves the area
      break;
    case txn_kind::custom:
      for (uint64_t j = 0; j < txns; ++j)
        if (static_cast<double>(hash64(profile_.seed, 'd',
                                       static_cast<uint32_t>(e), j)) *
                0x1p-64 <
            profile_.direction_mix)
          ++total;
      break;
    }
  }
  return total;
}

void traffic_generator::for_each(
    const std::function<bool(const packet_descriptor&)>& fn) const {
  uint64_t index = 0;
  for (uint32_t s = 0; s < profile_.duration_seconds; ++s) {
    for (size_t e = 0; e < profile_.transactions.size(); ++e) {
      const profile_entry& entry = profile_.transactions[e];
      uint64_t lo = txns_before(e, s);
      uint64_t hi = txns_before(e, s + 1);
      uint64_t in_second = hi - lo;
      uint32_t steps = packets_per_txn(entry.kind);
      for (uint64_t j = lo; j < hi; ++j) {
        uint32_t base_nsec = static_cast<uint32_t>(
            (j - lo) * 1000000000ull / std::max<uint64_t>(in_second, 1));
        for (uint32_t k = 0; k < steps; ++k) {
          packet_descriptor d;
          d.index = index++;
          d.entry = static_cast<uint32_t>(e);
          d.transaction = j;
          d.kind = kind_of(entry.kind, k);
          switch (d.kind) {
          case packet_kind::modbus_request:
          case packet_kind::modbus_ack:
          case packet_kind::mqtt_publish:
            d.outgoing = true;
            break;
          case packet_kind::modbus_response:
          case packet_kind::mqtt_ack:
            d.outgoing = false;
            break;
          case packet_kind::custom:
            d.outgoing = static_cast<double>(hash64(
                             profile_.seed, 'd', d.entry, j)) *
                             0x1p-64 <
                         profile_.direction_mix;
            break;
          }
          d.ts_sec = profile_.epoch + s;
          d.ts_nsec = std::min(base_nsec + k * 1000u, 999999999u);
          if (!fn(d))
            return;
        }
      }
    }
  }
}

std::vector<uint8_t> traffic_generator::payload(
    const packet_descriptor& d) const {
  switch (d.kind) {
  case packet_kind::modbus_request:
  case packet_kind::modbus_response: {
    // Transaction ids stay below 0x1400: higher values can make the MBAP
    // header mimic a TLS record header and fail IT cross-validation.
    uint16_t tid = static_cast<uint16_t>(d.transaction % 5003);
    uint64_t r = hash64(profile_.seed, 'm', d.entry, d.transaction);
    uint16_t reg = static_cast<uint16_t>(r >> 16);
    uint16_t value = static_cast<uint16_t>(r);
    return {static_cast<uint8_t>(tid >> 8), static_cast<uint8_t>(tid),
            0x00, 0x00, 0x00, 0x06, 0x01, 0x06,
            static_cast<uint8_t>(reg >> 8), static_cast<uint8_t>(reg),
            static_cast<uint8_t>(value >> 8), static_cast<uint8_t>(value)};
  }
  case packet_kind::mqtt_publish: {
    uint64_t t = hash64(profile_.seed, 'q', d.entry, d.transaction);
    uint64_t body = hash64(profile_.seed, 'p', d.entry, d.transaction);
    std::vector<uint8_t> out = {0x30, 0x0b, 0x00, 0x04, 's', '/',
                                static_cast<uint8_t>('0' + t % 100 / 10),
                                static_cast<uint8_t>('0' + t % 10)};
    for (int i = 0; i < 5; ++i)
      out.push_back(static_cast<uint8_t>(body >> (8 * i)));
    return out;
  }
  case packet_kind::custom: {
    uint16_t n = profile_.transactions[d.entry].custom_payload_bytes;
    std::vector<uint8_t> out;
    out.reserve(n);
    for (uint16_t i = 0; i < n; ++i) {
      if (i % 8 == 0) {
        uint64_t block =
            hash64(profile_.seed, 'c', d.entry, d.transaction * 131 + i / 8);
        for (int b = 0; b < 8 && out.size() < n; ++b)
          out.push_back(static_cast<uint8_t>(block >> (8 * b)));
      }
    }
    return out;
  }
  case packet_kind::modbus_ack:
  case packet_kind::mqtt_ack:
    return {};
  }
  return {};
}

std::vector<uint8_t> traffic_generator::frame(
    const packet_descriptor& d) const {
  txn_kind kind = profile_.transactions[d.entry].kind;
  uint16_t client_port = static_cast<uint16_t>(49300 + d.entry);
  uint16_t server_port = server_port_of(kind);
  std::vector<uint8_t> body = payload(d);
  uint8_t flags = body.empty() ? tcpflag::ack : (tcpflag::psh | tcpflag::ack);
  if (d.outgoing)
    return build_tcp_frame(client_ip_, client_port, server_ip_, server_port,
                           flags, body);
  return build_tcp_frame(server_ip_, server_port, client_ip_, client_port,
                         flags, body);
}

std::optional<sampling_mode> parse_sampling_mode(std::string_view name) {
  if (name == "bernoulli")
    return sampling_mode::bernoulli;
  if (name == "every-nth")
    return sampling_mode::deterministic_every_nth;
  return std::nullopt;
}

bool bernoulli_take(uint64_t seed, uint64_t index, uint32_t rate_reciprocal) {
  if (rate_reciprocal == 1)
    return true;
  return hash64(seed, 's', 0, index) % rate_reciprocal == 0;
}

sample_counts sample_stream(
    const traffic_generator& gen, const sampler_config& cfg, uint64_t seed,
    const std::function<void(const packet_descriptor&)>& on_sample) {
  if (cfg.rate_reciprocal == 0)
    throw std::invalid_argument("rate reciprocal must be positive");
  sample_counts counts;
  gen.for_each([&](const packet_descriptor& d) {
    if (cfg.sample_outgoing_only && !d.outgoing)
      return true;
    ++counts.eligible;
    bool take = cfg.mode == sampling_mode::bernoulli
                    ? bernoulli_take(seed, d.index, cfg.rate_reciprocal)
                    : counts.eligible % cfg.rate_reciprocal == 0;
    if (take) {
      ++counts.sampled;
      on_sample(d);
    }
    return true;
  });
  return counts;
}

uint64_t sample_count(uint64_t eligible, const sampler_config& cfg,
                      uint64_t seed) {
  if (cfg.rate_reciprocal == 0)
    throw std::invalid_argument("rate reciprocal must be positive");
  if (cfg.mode == sampling_mode::deterministic_every_nth)
    return eligible / cfg.rate_reciprocal;
  uint64_t sampled = 0;
  for (uint64_t i = 0; i < eligible; ++i)
    if (bernoulli_take(seed, i, cfg.rate_reciprocal))
      ++sampled;
  return sampled;
}

uint64_t write_stream_pcap(const traffic_generator& gen,
                           const std::string& path) {
  pcap_writer writer;
  if (!writer.open(path))
    throw std::runtime_error("cannot write pcap: " + path);
  gen.for_each([&](const packet_descriptor& d) {
    writer.write(d.ts_sec, d.ts_nsec, gen.frame(d));
    return true;
  });
  writer.close();
  return writer.packets_written();
}

sample_counts write_sampled_sflow(const traffic_generator& gen,
                                  const sampler_config& cfg, uint64_t seed,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good())
    throw std::runtime_error("cannot write sFlow capture: " + path);
  uint32_t datagram_seq = 0;
  auto counts = sample_stream(gen, cfg, seed, [&](const packet_descriptor& d) {
    std::vector<uint8_t> whole = gen.frame(d);
    sflow_sample_spec spec;
    spec.sequence = datagram_seq;
    spec.source_index = 1;
    spec.sample_rate = cfg.rate_reciprocal;
    spec.frame_length = static_cast<uint32_t>(whole.size());
    spec.header = std::move(whole);
    if (spec.header.size() > default_snaplen)
      spec.header.resize(default_snaplen);
    uint32_t uptime_ms = static_cast<uint32_t>(
        (d.ts_sec - gen.profile().epoch) * 1000 + d.ts_nsec / 1000000);
    std::vector<uint8_t> datagram = encode_sflow_datagram(
        synth_agent_ip, 1, datagram_seq, uptime_ms, {spec});
    ++datagram_seq;
    uint8_t len[4] = {static_cast<uint8_t>(datagram.size() >> 24),
                      static_cast<uint8_t>(datagram.size() >> 16),
                      static_cast<uint8_t>(datagram.size() >> 8),
                      static_cast<uint8_t>(datagram.size())};
    out.write(reinterpret_cast<const char*>(len), 4);
    out.write(reinterpret_cast<const char*>(datagram.data()),
              static_cast<std::streamsize>(datagram.size()));
  });
  if (!out.good())
    throw std::runtime_error("short write on sFlow capture: " + path);
  return counts;
}

validation_report validate_end_to_end(const traffic_profile& profile,
                                      const sampler_config& cfg,
                                      const validation_options& opts) {
  traffic_generator gen(profile);

  pseudonymizer ps(
      pseudonym_key::from_hex("5a11da7e0f2b4c6d8e9fa0b1c2d3e4f5"));
  as_map amap;
  amap.add(gen.client_ip() & 0xffffff00u, 24, 64500, true);
  amap.add(gen.server_ip() & 0xffffff00u, 24, 64510, false);
  packet_tagger tagger(ps, amap);

  intel_db intel;
  for (const std::string& ip : opts.scanner_ips) {
    auto parsed = parse_ipv4(ip);
    if (!parsed)
      throw std::invalid_argument("scanner address must be dotted IPv4: " + ip);
    intel_record rec;
    rec.host = ps.pseudonym(*parsed);
    rec.cls = intel_class::malicious;
    rec.last_seen = "2020-01-14T00:00:00Z";
    rec.provenance = "synthetic validation profile";
    intel.add(std::move(rec));
  }

  validation_report rep;
  rep.total_packets = gen.total_packets();

  std::vector<packet_descriptor> sampled_descs;
  std::vector<sampled_packet> packets;
  ingest_stats stats;
  auto counts = sample_stream(gen, cfg, opts.sampler_seed,
                              [&](const packet_descriptor& d) {
    sampled_descs.push_back(d);
    std::vector<uint8_t> whole = gen.frame(d);
    if (opts.through_sflow) {
      sflow_sample_spec spec;
      spec.sequence = static_cast<uint32_t>(sampled_descs.size());
      spec.source_index = 1;
      spec.sample_rate = cfg.rate_reciprocal;
      spec.frame_length = static_cast<uint32_t>(whole.size());
      spec.header = std::move(whole);
      if (spec.header.size() > default_snaplen)
        spec.header.resize(default_snaplen);
      std::vector<uint8_t> datagram =
          encode_sflow_datagram(synth_agent_ip, 1, spec.sequence, 0, {spec});
      ingest_sflow_datagram(datagram.data(), datagram.size(), tagger, d.ts_sec,
                            d.ts_nsec, packets, stats);
    } else {
      packets.push_back(tagger.tag(whole, d.ts_sec, d.ts_nsec,
                                   static_cast<uint32_t>(whole.size()),
                                   cfg.rate_reciprocal, "synth0"));
    }
    switch (d.kind) {
    case packet_kind::modbus_request:
      ++rep.sampled_modbus_requests;
      break;
    case packet_kind::modbus_ack:
      ++rep.sampled_modbus_acks;
      break;
    case packet_kind::mqtt_publish:
      ++rep.sampled_mqtt_publishes;
      break;
    default:
      ++rep.sampled_other;
      break;
    }
  });
  rep.eligible_packets = counts.eligible;
  rep.sampled_packets = counts.sampled;
  if (packets.size() != sampled_descs.size())
    throw std::logic_error("sFlow round trip lost sampled packets");

  auto result = classify_packets(packets, protocol_registry::builtin(), intel);
  for (size_t i = 0; i < sampled_descs.size(); ++i) {
    if (!sampled_descs[i].carries_pdu())
      continue;
    ++rep.pdu_packets;
    const verdict& v = result.verdicts[i];
    if (v.has(basis_tag::dissect_ok))
      ++rep.pdu_well_formed;
    if (v.label == verdict_label::legitimate_ics)
      ++rep.pdu_legitimate;
    else if (v.label == verdict_label::ics_scanner)
      ++rep.pdu_scanner;
  }

  rep.expected_ratio = 1.0 / cfg.rate_reciprocal;
  rep.observed_ratio =
      rep.eligible_packets == 0
          ? 0.0
          : static_cast<double>(rep.sampled_packets) /
                static_cast<double>(rep.eligible_packets);
  rep.bounds = sigma_bounds(static_cast<double>(rep.eligible_packets),
                            cfg.rate_reciprocal, opts.max_ratio_sigmas);
  rep.deviation_sigmas =
      rep.bounds.sigma > 0
          ? std::abs(static_cast<double>(rep.sampled_packets) -
                     rep.bounds.mean) /
                rep.bounds.sigma
          : 0.0;
  rep.ratio_ok = static_cast<double>(rep.sampled_packets) >= rep.bounds.lo &&
                 static_cast<double>(rep.sampled_packets) <= rep.bounds.hi;
  rep.dissection_ok = rep.pdu_well_formed == rep.pdu_packets;
  rep.classification_ok = rep.pdu_legitimate == rep.pdu_packets;
  rep.passed = rep.dissection_ok && rep.classification_ok && rep.ratio_ok;
  return rep;
}

} // namespace icsmon
