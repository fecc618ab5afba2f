#include "icsmon/samples_io.hpp"

#include <fstream>

#include <json.hpp>

namespace icsmon {

namespace {

using nlohmann::json;

json host_to_json(const host_id& h) {
  return json{{"pseudonym", h.pseudonym},
              {"asn", h.asn},
              {"in_area", h.in_ixp_area}};
}

host_id host_from_json(const json& j) {
  host_id h;
  h.pseudonym = j.at("pseudonym").get<std::string>();
  h.asn = j.at("asn").get<uint32_t>();
  h.in_ixp_area = j.at("in_area").get<bool>();
  return h;
}

transport transport_from_string(const std::string& s) {
  if (s == "tcp")
    return transport::tcp;
  if (s == "udp")
    return transport::udp;
  if (s == "icmp")
    return transport::icmp;
  if (s == "other")
    return transport::other;
  throw std::invalid_argument("unknown transport: " + s);
}

} // namespace

std::string to_hex(const std::vector<uint8_t>& bytes) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

bool from_hex(const std::string& hex, std::vector<uint8_t>& out) {
  if (hex.size() % 2 != 0)
    return false;
  out.clear();
  out.reserve(hex.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
      return c - 'A' + 10;
    return -1;
  };
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0)
      return false;
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return true;
}

void write_samples(std::ostream& os, const std::vector<sampled_packet>& pkts) {
  for (const auto& p : pkts) {
    json j{{"ts_sec", p.ts_sec},
           {"ts_nsec", p.ts_nsec},
           {"src", host_to_json(p.src)},
           {"dst", host_to_json(p.dst)},
           {"src_port", p.src_port},
           {"dst_port", p.dst_port},
           {"transport", to_string(p.tr)},
           {"ip_proto", p.ip_proto},
           {"tcp_flags", p.tcp_flags},
           {"captured_len", p.captured_len},
           {"original_len", p.original_len},
           {"rate", p.rate_reciprocal}};
    if (!p.payload.empty())
      j["payload"] = to_hex(p.payload);
    if (!p.agent.empty())
      j["agent"] = p.agent;
    os << j.dump() << '\n';
  }
}

bool write_samples_file(const std::string& path,
                        const std::vector<sampled_packet>& pkts) {
  std::ofstream os(path);
  if (!os)
    return false;
  write_samples(os, pkts);
  return bool(os);
}

bool read_samples(std::istream& is, std::vector<sampled_packet>& out,
                  std::string* error) {
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty())
      continue;
    try {
      json j = json::parse(line);
      sampled_packet p;
      p.ts_sec = j.at("ts_sec").get<int64_t>();
      p.ts_nsec = j.at("ts_nsec").get<uint32_t>();
      p.src = host_from_json(j.at("src"));
      p.dst = host_from_json(j.at("dst"));
      p.src_port = j.at("src_port").get<uint16_t>();
      p.dst_port = j.at("dst_port").get<uint16_t>();
      p.tr = transport_from_string(j.at("transport").get<std::string>());
      p.ip_proto = j.at("ip_proto").get<uint8_t>();
      p.tcp_flags = j.at("tcp_flags").get<uint8_t>();
      p.captured_len = j.at("captured_len").get<uint16_t>();
      p.original_len = j.at("original_len").get<uint32_t>();
      p.rate_reciprocal = j.at("rate").get<uint32_t>();
      if (j.contains("payload")) {
        if (!from_hex(j["payload"].get<std::string>(), p.payload))
          throw std::invalid_argument("bad payload hex");
      }
      if (j.contains("agent"))
        p.agent = j["agent"].get<std::string>();
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      if (error)
        *error = "line " + std::to_string(lineno) + ": " + e.what();
      return false;
    }
  }
  return true;
}

bool read_samples_file(const std::string& path,
                       std::vector<sampled_packet>& out, std::string* error) {
  std::ifstream is(path);
  if (!is) {
    if (error)
      *error = "cannot open " + path;
    return false;
  }
  return read_samples(is, out, error);
}

} // namespace icsmon
