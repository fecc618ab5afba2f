#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "icsmon/asmap.hpp"
#include "icsmon/classify.hpp"
#include "icsmon/digest.hpp"
#include "icsmon/dissect.hpp"
#include "icsmon/frame.hpp"
#include "icsmon/ingest.hpp"
#include "icsmon/itproto.hpp"
#include "icsmon/pseudonym.hpp"
#include "icsmon/stats.hpp"
#include "icsmon/synth.hpp"

using namespace icsmon;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

traffic_profile small_profile(double modbus_rate, double mqtt_rate,
                              uint32_t duration, uint64_t seed = 11) {
  traffic_profile p;
  p.transactions = {
      {txn_kind::modbus_write_single_register, modbus_rate, 8},
      {txn_kind::mqtt_publish, mqtt_rate, 8},
  };
  p.duration_seconds = duration;
  p.seed = seed;
  return p;
}

std::vector<packet_descriptor> all_descriptors(const traffic_generator& gen) {
  std::vector<packet_descriptor> out;
  gen.for_each([&](const packet_descriptor& d) {
    out.push_back(d);
    return true;
  });
  return out;
}

sampled_packet as_packet(const traffic_generator& gen,
                         const packet_descriptor& d) {
  auto decoded = parse_ethernet(gen.frame(d));
  REQUIRE(decoded.has_value());
  sampled_packet pkt;
  pkt.src_port = decoded->src_port;
  pkt.dst_port = decoded->dst_port;
  pkt.tr = decoded->tr;
  pkt.ip_proto = decoded->ip_proto;
  pkt.tcp_flags = decoded->tcp_flags;
  auto frame = gen.frame(d);
  pkt.payload.assign(frame.begin() + decoded->payload_offset, frame.end());
  return pkt;
}

} // namespace

TEST_CASE("profile arithmetic matches the transaction shapes") {
  SUBCASE("reference profile totals") {
    traffic_generator gen(reference_profile());
    CHECK(gen.transactions_of(0) == 864000);
    CHECK(gen.transactions_of(1) == 864000);
    CHECK(gen.total_transactions() == 1728000);
    CHECK(gen.total_packets() == 4320000);
    CHECK(gen.outgoing_packets() == 2592000);
  }

  SUBCASE("one modbus transaction is three packets") {
    traffic_profile p;
    p.transactions = {{txn_kind::modbus_write_single_register, 1.0, 8}};
    p.duration_seconds = 1;
    traffic_generator gen(p);
    auto descs = all_descriptors(gen);
    REQUIRE(descs.size() == 3);
    CHECK(descs[0].kind == packet_kind::modbus_request);
    CHECK(descs[1].kind == packet_kind::modbus_response);
    CHECK(descs[2].kind == packet_kind::modbus_ack);
    CHECK(descs[0].outgoing);
    CHECK_FALSE(descs[1].outgoing);
    CHECK(descs[2].outgoing);
    auto request = gen.payload(descs[0]);
    REQUIRE(request.size() == 12);
    CHECK(request[7] == 0x06); // Write Single Register
    CHECK(gen.payload(descs[1]).size() == 12);
    CHECK(gen.payload(descs[2]).empty());
    CHECK(descs[0].carries_pdu());
    CHECK_FALSE(descs[2].carries_pdu());
  }

  SUBCASE("one mqtt transaction is two packets") {
    traffic_profile p;
    p.transactions = {{txn_kind::mqtt_publish, 1.0, 8}};
    p.duration_seconds = 1;
    traffic_generator gen(p);
    auto descs = all_descriptors(gen);
    REQUIRE(descs.size() == 2);
    CHECK(descs[0].kind == packet_kind::mqtt_publish);
    CHECK(descs[1].kind == packet_kind::mqtt_ack);
    CHECK(descs[0].outgoing);
    CHECK_FALSE(descs[1].outgoing);
    CHECK(gen.payload(descs[0])[0] == 0x30);
  }

  SUBCASE("zero duration yields an empty stream") {
    traffic_generator gen(small_profile(10, 10, 0));
    CHECK(gen.total_packets() == 0);
    CHECK(all_descriptors(gen).empty());
  }

  SUBCASE("fractional rates accumulate per second") {
    traffic_profile p;
    p.transactions = {{txn_kind::mqtt_publish, 0.5, 8}};
    p.duration_seconds = 10;
    traffic_generator gen(p);
    CHECK(gen.transactions_of(0) == 5);
    CHECK(gen.total_packets() == 10);
  }

  SUBCASE("invalid profiles are rejected") {
    auto bad_rate = small_profile(0.0, 10, 60);
    CHECK_THROWS_AS(traffic_generator{bad_rate}, std::invalid_argument);
    auto negative = small_profile(-1.0, 10, 60);
    CHECK_THROWS_AS(traffic_generator{negative}, std::invalid_argument);
    auto mix = small_profile(1, 1, 60);
    mix.direction_mix = 1.5;
    CHECK_THROWS_AS(traffic_generator{mix}, std::invalid_argument);
    auto addr = small_profile(1, 1, 60);
    addr.client_ip = "not-an-ip";
    CHECK_THROWS_AS(traffic_generator{addr}, std::invalid_argument);
    traffic_profile empty_custom;
    empty_custom.transactions = {{txn_kind::custom, 1.0, 0}};
    empty_custom.duration_seconds = 1;
    CHECK_THROWS_AS(traffic_generator{empty_custom}, std::invalid_argument);
  }

  SUBCASE("stream indexes and timestamps are well formed") {
    traffic_generator gen(small_profile(3, 2, 7, 42));
    auto descs = all_descriptors(gen);
    REQUIRE(descs.size() == gen.total_packets());
    for (size_t i = 0; i < descs.size(); ++i) {
      CHECK(descs[i].index == i);
      CHECK(descs[i].ts_sec >= gen.profile().epoch);
      CHECK(descs[i].ts_sec < gen.profile().epoch + 7);
      CHECK(descs[i].ts_nsec < 1000000000u);
    }
  }
}

TEST_CASE("generated frames decode and dissect on their registry ports") {
  traffic_profile p = small_profile(2, 2, 5, 7);
  p.transactions.push_back({txn_kind::custom, 2.0, 16});
  traffic_generator gen(p);
  const auto& reg = protocol_registry::builtin();

  size_t pdu_seen = 0;
  for (const packet_descriptor& d : all_descriptors(gen)) {
    auto decoded = parse_ethernet(gen.frame(d));
    REQUIRE(decoded.has_value());
    CHECK(decoded->tr == transport::tcp);
    uint32_t expect_src = d.outgoing ? gen.client_ip() : gen.server_ip();
    uint32_t expect_dst = d.outgoing ? gen.server_ip() : gen.client_ip();
    CHECK(decoded->src_ip == expect_src);
    CHECK(decoded->dst_ip == expect_dst);

    sampled_packet pkt = as_packet(gen, d);
    CHECK(pkt.payload == gen.payload(d));
    if (pkt.payload.empty())
      CHECK(pkt.tcp_flags == tcpflag::ack);
    else
      CHECK(pkt.tcp_flags == (tcpflag::psh | tcpflag::ack));

    if (!d.carries_pdu())
      continue;
    ++pdu_seen;
    auto dis = dissect_packet(pkt, reg);
    REQUIRE_FALSE(dis.empty());
    protocol_id want = d.kind == packet_kind::mqtt_publish
                           ? protocol_id::mqtt
                           : protocol_id::modbus_tcp;
    bool well_formed = false;
    for (const auto& cand : dis)
      if (cand.proto == want && cand.result == dissect_result::well_formed)
        well_formed = true;
    CHECK(well_formed);
    // PDUs must survive IT cross-validation, whatever the seed.
    CHECK_FALSE(is_specific(recognize_it(pkt)));
  }
  CHECK(pdu_seen == 2 * 10 + 10);
}

TEST_CASE("modbus transaction ids never mimic a TLS record header") {
  traffic_generator gen(small_profile(1, 1, 1));
  for (uint64_t txn : {uint64_t{0x1403}, uint64_t{0x1503}, uint64_t{0x1603},
                       uint64_t{0x1703}, uint64_t{5002}, uint64_t{5003},
                       uint64_t{863999}}) {
    packet_descriptor d;
    d.entry = 0;
    d.transaction = txn;
    d.kind = packet_kind::modbus_request;
    auto body = gen.payload(d);
    REQUIRE(body.size() == 12);
    CHECK(body[0] < 0x14);

    sampled_packet pkt;
    pkt.tr = transport::tcp;
    pkt.src_port = 49300;
    pkt.dst_port = 502;
    pkt.payload = body;
    CHECK_FALSE(is_specific(recognize_it(pkt)));
  }
}

TEST_CASE("bernoulli sampling is exact, deterministic, and unbiased") {
  SUBCASE("rate one keeps everything") {
    sampler_config cfg;
    cfg.rate_reciprocal = 1;
    CHECK(sample_count(1000, cfg, 5) == 1000);
  }

  SUBCASE("zero rate reciprocal is rejected") {
    sampler_config cfg;
    cfg.rate_reciprocal = 0;
    CHECK_THROWS_AS(sample_count(10, cfg, 5), std::invalid_argument);
  }

  SUBCASE("every-nth mode is exact") {
    sampler_config cfg;
    cfg.mode = sampling_mode::deterministic_every_nth;
    cfg.rate_reciprocal = 4096;
    CHECK(sample_count(10000, cfg, 5) == 2);
    CHECK(sample_count(4095, cfg, 5) == 0);
    CHECK(sample_count(4096, cfg, 5) == 1);
  }

  SUBCASE("identical seeds reproduce the sampled stream") {
    traffic_generator gen(small_profile(20, 20, 120, 3));
    sampler_config cfg;
    cfg.rate_reciprocal = 64;
    auto run = [&](uint64_t seed) {
      std::vector<uint64_t> taken;
      sample_stream(gen, cfg, seed,
                    [&](const packet_descriptor& d) { taken.push_back(d.index); });
      return taken;
    };
    auto first = run(77);
    CHECK(first == run(77));
    CHECK(first != run(78));
    CHECK_FALSE(first.empty());
  }

  SUBCASE("seed ensemble mean tracks the sampling probability") {
    const uint64_t eligible = 9000;
    sampler_config cfg;
    cfg.rate_reciprocal = 256;
    const double p = 1.0 / cfg.rate_reciprocal;
    const int seeds = 30;
    double total = 0;
    for (int s = 1; s <= seeds; ++s)
      total += static_cast<double>(sample_count(eligible, cfg, s));
    double mean_ratio = total / (seeds * static_cast<double>(eligible));
    double sigma_of_mean =
        std::sqrt(p * (1 - p) / static_cast<double>(eligible)) /
        std::sqrt(static_cast<double>(seeds));
    CHECK(std::abs(mean_ratio - p) < 2 * sigma_of_mean);
  }

  SUBCASE("the validation run count lands inside the window") {
    // 1,477,915 eligible at 2^-12: the three-sigma window is about
    // [303, 419] around a mean of 360.8, and the reference run saw 346.
    auto bounds = sigma_bounds(1477915, 4096, 3.0);
    CHECK(bounds.mean == doctest::Approx(360.82).epsilon(0.001));
    CHECK(bounds.lo <= 346);
    CHECK(bounds.hi >= 346);
    CHECK(bounds.lo >= 303);
    CHECK(bounds.hi <= 419);

    sampler_config cfg;
    for (uint64_t seed : {1, 2, 3}) {
      uint64_t sampled = sample_count(1477915, cfg, seed);
      CHECK(sampled >= 303);
      CHECK(sampled <= 419);
    }
  }
}

TEST_CASE("end-to-end validation reproduces the self-injection run") {
  traffic_profile profile = small_profile(10, 10, 7200, 20260825);
  sampler_config cfg;

  SUBCASE("clean run passes every gate") {
    auto rep = validate_end_to_end(profile, cfg);
    CHECK(rep.total_packets == 360000);
    CHECK(rep.eligible_packets == 216000);
    CHECK(rep.sampled_packets > 0);
    CHECK(rep.sampled_packets == rep.sampled_modbus_requests +
                                     rep.sampled_modbus_acks +
                                     rep.sampled_mqtt_publishes);
    CHECK(rep.sampled_other == 0); // only outgoing kinds can be sampled
    CHECK(rep.pdu_packets ==
          rep.sampled_modbus_requests + rep.sampled_mqtt_publishes);
    CHECK(rep.pdu_well_formed == rep.pdu_packets);
    CHECK(rep.pdu_legitimate == rep.pdu_packets);
    CHECK(rep.pdu_scanner == 0);
    CHECK(rep.expected_ratio == doctest::Approx(1.0 / 4096));
    CHECK(rep.observed_ratio ==
          doctest::Approx(double(rep.sampled_packets) / 216000));
    CHECK(rep.dissection_ok);
    CHECK(rep.classification_ok);
    CHECK(rep.ratio_ok);
    CHECK(rep.passed);

    auto again = validate_end_to_end(profile, cfg);
    CHECK(again.sampled_packets == rep.sampled_packets);
    CHECK(again.sampled_modbus_requests == rep.sampled_modbus_requests);
  }

  SUBCASE("sFlow round trip and direct tagging agree") {
    validation_options direct;
    direct.through_sflow = false;
    auto rep_sflow = validate_end_to_end(profile, cfg);
    auto rep_direct = validate_end_to_end(profile, cfg, direct);
    CHECK(rep_sflow.sampled_packets == rep_direct.sampled_packets);
    CHECK(rep_sflow.pdu_well_formed == rep_direct.pdu_well_formed);
    CHECK(rep_sflow.pdu_legitimate == rep_direct.pdu_legitimate);
    CHECK(rep_sflow.passed == rep_direct.passed);
  }

  SUBCASE("a client listed as scanner flips every verdict") {
    validation_options opts;
    opts.scanner_ips = {profile.client_ip};
    auto rep = validate_end_to_end(profile, cfg, opts);
    CHECK(rep.pdu_packets > 0);
    CHECK(rep.pdu_well_formed == rep.pdu_packets);
    CHECK(rep.pdu_scanner == rep.pdu_packets);
    CHECK(rep.pdu_legitimate == 0);
    CHECK(rep.dissection_ok);
    CHECK_FALSE(rep.classification_ok);
    CHECK_FALSE(rep.passed);
  }

  SUBCASE("every-nth sampling is a degenerate but passing case") {
    sampler_config nth;
    nth.mode = sampling_mode::deterministic_every_nth;
    auto rep = validate_end_to_end(profile, nth);
    CHECK(rep.sampled_packets == 216000 / 4096);
    CHECK(rep.passed);
  }

  SUBCASE("an impossible sigma budget flags the ratio") {
    validation_options opts;
    opts.max_ratio_sigmas = 1e-9;
    auto rep = validate_end_to_end(profile, cfg, opts);
    CHECK(rep.dissection_ok);
    CHECK(rep.classification_ok);
    CHECK_FALSE(rep.ratio_ok);
    CHECK_FALSE(rep.passed);
  }
}

TEST_CASE("sampled sFlow emission round-trips through ingest") {
  traffic_generator gen(small_profile(5, 5, 300, 9));
  sampler_config cfg;
  cfg.rate_reciprocal = 64;
  auto path = temp_path("icsmon_synth_samples.sflow");

  auto counts = write_sampled_sflow(gen, cfg, 123, path);
  CHECK(counts.eligible == 4500);
  CHECK(counts.sampled > 0);

  auto digest_one = sha256_file(path);
  write_sampled_sflow(gen, cfg, 123, path);
  CHECK(sha256_file(path) == digest_one);

  pseudonymizer ps(pseudonym_key::from_hex("00112233445566778899aabbccddeeff"));
  as_map amap;
  amap.add(gen.client_ip() & 0xffffff00u, 24, 64500, true);
  packet_tagger tagger(ps, amap);
  std::vector<sampled_packet> packets;
  ingest_stats stats;
  std::string error;
  REQUIRE(ingest_sflow_file(path, tagger, packets, stats, &error));
  CHECK(error.empty());
  CHECK(stats.datagrams == counts.sampled);
  CHECK(stats.samples_decoded == counts.sampled);
  REQUIRE(packets.size() == counts.sampled);
  for (const sampled_packet& pkt : packets) {
    CHECK(pkt.rate_reciprocal == 64);
    CHECK(pkt.tr == transport::tcp);
    CHECK((pkt.dst_port == 502 || pkt.dst_port == 1883)); // outgoing only
    CHECK(pkt.agent == "10.0.0.1");
    CHECK(pkt.src.in_ixp_area); // the client prefix carries the area flag
  }
  std::remove(path.c_str());
}

TEST_CASE("full stream pcap emission is byte-stable and ingests back") {
  traffic_generator gen(small_profile(3, 3, 30, 4));
  auto path = temp_path("icsmon_synth_stream.pcap");

  CHECK(write_stream_pcap(gen, path) == gen.total_packets());
  auto digest_one = sha256_file(path);
  write_stream_pcap(gen, path);
  CHECK(sha256_file(path) == digest_one);

  pseudonymizer ps(pseudonym_key::from_hex("00112233445566778899aabbccddeeff"));
  as_map amap;
  packet_tagger tagger(ps, amap);
  std::vector<sampled_packet> packets;
  ingest_stats stats;
  std::string error;
  REQUIRE(ingest_pcap(path, tagger, 1, "synth0", packets, stats, &error));
  REQUIRE(packets.size() == gen.total_packets());

  auto descs = all_descriptors(gen);
  for (size_t i = 0; i < descs.size(); ++i) {
    CHECK(packets[i].payload == gen.payload(descs[i]));
    CHECK(packets[i].ts_sec == descs[i].ts_sec);
  }
  std::remove(path.c_str());
}
