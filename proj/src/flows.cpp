#include "icsmon/flows.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "icsmon/dissect.hpp"

namespace icsmon {

namespace {

// Specificity order used when merging per-packet labels into a flow label.
int rank_of(const flow_label& l) {
  if (std::holds_alternative<protocol_id>(l))
    return 3;
  return is_specific(std::get<it_label>(l)) ? 2 : 1;
}

flow_label label_packet(const sampled_packet& pkt,
                        const protocol_registry& registry) {
  for (const dissection& d : dissect_packet(pkt, registry))
    if (d.result == dissect_result::well_formed)
      return d.proto;
  return recognize_it(pkt);
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  return s.substr(b, e - b + 1);
}

} // namespace

std::string label_name(const flow_label& l) {
  if (std::holds_alternative<protocol_id>(l))
    return std::string(protocol_name(std::get<protocol_id>(l)));
  return std::string(to_string(std::get<it_label>(l)));
}

std::string_view to_string(share_basis b) {
  return b == share_basis::packet_based ? "packet-based" : "flow-based";
}

std::string_view to_string(iana_mapping m) {
  return m == iana_mapping::before_iana ? "before-iana" : "after-iana";
}

std::vector<flow_record> aggregate(const std::vector<sampled_packet>& packets,
                                   const protocol_registry& registry,
                                   const flow_options& opts) {
  // Time order within each conversation drives the idle-timeout split.
  std::vector<size_t> order(packets.size());
  for (size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return packets[a].ts_sec < packets[b].ts_sec;
  });

  std::map<flow_key, size_t> open; // key -> index into out
  std::vector<flow_record> out;
  for (size_t idx : order) {
    const sampled_packet& pkt = packets[idx];
    flow_key key = make_flow_key(pkt);
    flow_label label = label_packet(pkt, registry);

    auto it = open.find(key);
    if (it != open.end() &&
        pkt.ts_sec - out[it->second].last_seen > opts.idle_timeout_seconds)
      it = open.end(); // idle gap: the conversation restarts as a new flow

    if (it == open.end()) {
      flow_record rec;
      rec.key = key;
      rec.packet_count = 1;
      rec.first_seen = pkt.ts_sec;
      rec.last_seen = pkt.ts_sec;
      rec.label = label;
      open[key] = out.size();
      out.push_back(std::move(rec));
      continue;
    }
    flow_record& rec = out[it->second];
    ++rec.packet_count;
    rec.last_seen = pkt.ts_sec;
    if (rank_of(label) > rank_of(rec.label))
      rec.label = label;
  }
  return out;
}

iana_services iana_services::from_stream(std::istream& in) {
  iana_services s;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trimmed(line);
    if (t.empty() || t[0] == '#')
      continue;
    std::istringstream row(t);
    std::string port_s;
    std::string tr_s;
    std::string name;
    if (!std::getline(row, port_s, ',') || !std::getline(row, tr_s, ',') ||
        !std::getline(row, name))
      throw std::runtime_error("services table line " + std::to_string(lineno) +
                               ": expected port,transport,service");
    int port = 0;
    try {
      port = std::stoi(trimmed(port_s));
    } catch (const std::exception&) {
      port = -1;
    }
    if (port < 0 || port > 65535)
      throw std::runtime_error("services table line " + std::to_string(lineno) +
                               ": bad port");
    std::string tr_name = trimmed(tr_s);
    transport tr;
    if (tr_name == "tcp")
      tr = transport::tcp;
    else if (tr_name == "udp")
      tr = transport::udp;
    else
      throw std::runtime_error("services table line " + std::to_string(lineno) +
                               ": transport must be tcp or udp");
    name = trimmed(name);
    if (name.empty())
      throw std::runtime_error("services table line " + std::to_string(lineno) +
                               ": empty service name");
    s.table_[{static_cast<uint16_t>(port), static_cast<uint8_t>(tr)}] = name;
  }
  return s;
}

iana_services iana_services::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good())
    throw std::runtime_error("cannot open services table: " + path);
  return from_stream(in);
}

std::optional<std::string> iana_services::lookup(uint16_t port,
                                                 transport tr) const {
  auto it = table_.find({port, static_cast<uint8_t>(tr)});
  if (it == table_.end())
    return std::nullopt;
  return it->second;
}

std::optional<std::string> map_iana(const flow_record& flow,
                                    const iana_services& services) {
  uint16_t low = std::min(flow.key.lo_port, flow.key.hi_port);
  if (low >= 49152)
    return std::nullopt; // both ports ephemeral
  return services.lookup(low, flow.key.tr);
}

void apply_iana(std::vector<flow_record>& flows,
                const iana_services& services) {
  for (flow_record& f : flows)
    f.iana_service = map_iana(f, services);
}

traffic_breakdown breakdown(const std::vector<flow_record>& flows,
                            share_basis basis, iana_mapping mapping,
                            size_t top_k) {
  traffic_breakdown b;
  b.basis = basis;
  b.mapping = mapping;

  std::map<std::string, uint64_t> weights;
  uint64_t total = 0;
  for (const flow_record& f : flows) {
    std::string name = label_name(f.label);
    if (mapping == iana_mapping::after_iana && rank_of(f.label) == 1 &&
        f.iana_service)
      name = *f.iana_service;
    uint64_t w = basis == share_basis::packet_based ? f.packet_count : 1;
    weights[name] += w;
    total += w;
  }
  if (total == 0)
    return b;

  std::vector<std::pair<std::string, uint64_t>> rows(weights.begin(),
                                                     weights.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& z) {
    if (a.second != z.second)
      return a.second > z.second;
    return a.first < z.first;
  });
  if (top_k > 0 && rows.size() > top_k)
    rows.resize(top_k);
  for (const auto& [name, w] : rows)
    b.shares.emplace_back(name,
                          100.0 * static_cast<double>(w) /
                              static_cast<double>(total));
  return b;
}

coexistence_report it_coexistence(const std::vector<host_role>& roles,
                                  const std::vector<sampled_packet>& packets,
                                  const std::vector<verdict>& verdicts) {
  if (packets.size() != verdicts.size())
    throw std::invalid_argument("one verdict per packet required");

  coexistence_report r;
  r.ics_hosts = roles.size();
  for (const host_role& role : roles) {
    if (role.has_it_traffic)
      ++r.ics_hosts_with_it;
    if (role.has_it_traffic && !role.protocols_legitimate.empty())
      r.nat_suspects.push_back(role.host);
  }
  if (r.ics_hosts > 0)
    r.ics_host_share_pct = 100.0 * static_cast<double>(r.ics_hosts_with_it) /
                           static_cast<double>(r.ics_hosts);

  auto host_pair = [](const sampled_packet& pkt) {
    const std::string& a = pkt.src.pseudonym;
    const std::string& b = pkt.dst.pseudonym;
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  std::set<std::pair<std::string, std::string>> legit;
  std::set<std::pair<std::string, std::string>> it_pairs;
  for (const verdict& v : verdicts) {
    const sampled_packet& pkt = packets[v.packet_index];
    if (v.label == verdict_label::legitimate_ics)
      legit.insert(host_pair(pkt));
    else if (v.label == verdict_label::non_ics)
      it_pairs.insert(host_pair(pkt));
  }
  r.legitimate_pairs = legit.size();
  for (const auto& p : legit)
    if (it_pairs.count(p))
      ++r.legitimate_pairs_with_it;
  if (r.legitimate_pairs > 0)
    r.legitimate_pair_share_pct =
        100.0 * static_cast<double>(r.legitimate_pairs_with_it) /
        static_cast<double>(r.legitimate_pairs);
  return r;
}

} // namespace icsmon
