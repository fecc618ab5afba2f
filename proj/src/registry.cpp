#include "icsmon/registry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace icsmon {

namespace {

constexpr std::array<std::string_view, protocol_count> names = {
    "AMQP",        "ANSI C12.22", "ATG",        "BACnet/IP",
    "CoAP",        "Codesys",     "Crimson v3", "DNP3",
    "EtherCAT",    "Ethernet/IP", "FL-net",     "FF HSE",
    "GE-SRTP",     "HART IP",     "ICCP",       "IEC60870-5-104",
    "IEC61850",    "Modbus/TCP",  "MELSEC-Q",   "MQTT",
    "Niagara Fox", "OMRON FINS",  "OPC UA",     "PCWorx",
    "ProConOS",    "PROFINET",    "S7comm",     "Zigbee IP",
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const std::unordered_map<std::string, protocol_id>& alias_table() {
  static const std::unordered_map<std::string, protocol_id> table = [] {
    std::unordered_map<std::string, protocol_id> t;
    for (size_t i = 0; i < protocol_count; ++i)
      t[lower(names[i])] = protocol_id(i);
    // scan-export tag vocabulary
    t["modbus"] = protocol_id::modbus_tcp;
    t["s7"] = protocol_id::s7comm;
    t["siemens s7"] = protocol_id::s7comm;
    t["bacnet"] = protocol_id::bacnet_ip;
    t["fox"] = protocol_id::niagara_fox;
    t["niagara-fox"] = protocol_id::niagara_fox;
    t["ethernetip"] = protocol_id::ethernet_ip;
    t["enip"] = protocol_id::ethernet_ip;
    t["ethernet-ip"] = protocol_id::ethernet_ip;
    t["omron"] = protocol_id::omron_fins;
    t["omron-fins"] = protocol_id::omron_fins;
    t["iec-60870-5-104"] = protocol_id::iec104;
    t["iec104"] = protocol_id::iec104;
    t["iec-104"] = protocol_id::iec104;
    t["iec-61850"] = protocol_id::iec61850;
    t["hart-ip"] = protocol_id::hart_ip;
    t["opc-ua"] = protocol_id::opc_ua;
    t["opcua"] = protocol_id::opc_ua;
    t["ansi-c1222"] = protocol_id::ansi_c1222;
    t["c1222"] = protocol_id::ansi_c1222;
    t["ge-srtp"] = protocol_id::ge_srtp;
    t["melsec"] = protocol_id::melsec_q;
    t["melsec-q"] = protocol_id::melsec_q;
    t["crimson-v3"] = protocol_id::crimson_v3;
    t["crimson"] = protocol_id::crimson_v3;
    t["fl-net"] = protocol_id::fl_net;
    t["flnet"] = protocol_id::fl_net;
    t["ff-hse"] = protocol_id::ff_hse;
    t["foundation-fieldbus"] = protocol_id::ff_hse;
    t["zigbee"] = protocol_id::zigbee_ip;
    t["zigbee-ip"] = protocol_id::zigbee_ip;
    t["tank-gauge"] = protocol_id::atg;
    t["automated-tank-gauge"] = protocol_id::atg;
    t["proconos"] = protocol_id::proconos;
    t["pcworx"] = protocol_id::pcworx;
    return t;
  }();
  return table;
}

std::vector<port_range> parse_ranges(std::string_view field) {
  std::vector<port_range> out;
  if (field.empty() || field == "-")
    return out;
  std::stringstream ss{std::string(field)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    auto dash = item.find('-');
    port_range r;
    if (dash == std::string::npos) {
      r.lo = r.hi = uint16_t(std::stoul(item));
    } else {
      r.lo = uint16_t(std::stoul(item.substr(0, dash)));
      r.hi = uint16_t(std::stoul(item.substr(dash + 1)));
    }
    if (r.hi < r.lo)
      throw std::runtime_error("registry: inverted port range '" + item + "'");
    out.push_back(r);
  }
  return out;
}

std::string format_ranges(const std::vector<port_range>& ranges) {
  if (ranges.empty())
    return "-";
  std::string out;
  for (const auto& r : ranges) {
    if (!out.empty())
      out += ',';
    out += std::to_string(r.lo);
    if (r.hi != r.lo)
      out += '-' + std::to_string(r.hi);
  }
  return out;
}

} // namespace

std::string_view protocol_name(protocol_id p) {
  return names.at(size_t(p));
}

std::optional<protocol_id> parse_protocol(std::string_view name) {
  const auto& table = alias_table();
  auto it = table.find(lower(name));
  if (it == table.end())
    return std::nullopt;
  return it->second;
}

std::string_view report_group(protocol_id p) {
  switch (p) {
    case protocol_id::iccp:
    case protocol_id::iec61850:
    case protocol_id::s7comm:
      return "ICCP/IEC61850/S7";
    default:
      return protocol_name(p);
  }
}

std::vector<std::string> all_report_groups() {
  std::vector<std::string> out;
  for (size_t i = 0; i < protocol_count; ++i) {
    std::string g{report_group(protocol_id(i))};
    if (std::find(out.begin(), out.end(), g) == out.end())
      out.push_back(std::move(g));
  }
  return out;
}

bool registry_entry::has_port(uint16_t port, transport tr) const {
  const auto& ranges = tr == transport::tcp ? tcp_ports : udp_ports;
  if (tr != transport::tcp && tr != transport::udp)
    return false;
  return std::any_of(ranges.begin(), ranges.end(),
                     [port](const port_range& r) { return r.contains(port); });
}

const protocol_registry& protocol_registry::builtin() {
  static const protocol_registry reg = [] {
    // name | tcp | udp | secure | tier
    static constexpr const char* catalog =
        "AMQP|5671-5672|-|5671|full\n"
        "ANSI C12.22|1153|1153|-|full\n"
        "ATG|10001|-|-|full\n"
        "BACnet/IP|-|47808|-|full\n"
        "CoAP|5683|5683|-|full\n"
        "Codesys|2455|-|-|port-only\n"
        "Crimson v3|789|-|-|port-only\n"
        "DNP3|20000|20000|-|full\n"
        "EtherCAT|34980|34980|-|full\n"
        "Ethernet/IP|44818|2222|-|full\n"
        "FL-net|-|55000-55003|-|port-only\n"
        "FF HSE|1089-1091|1089-1091|-|full\n"
        "GE-SRTP|18245-18246|-|-|port-only\n"
        "HART IP|5094|5094|-|full\n"
        "ICCP|102|-|-|full\n"
        "IEC60870-5-104|2404|-|-|full\n"
        "IEC61850|102|-|-|full\n"
        "Modbus/TCP|502|-|-|full\n"
        "MELSEC-Q|5007|5006|-|port-only\n"
        "MQTT|1883,8883|-|8883|full\n"
        "Niagara Fox|1911,4911|-|-|port-only\n"
        "OMRON FINS|-|9600|-|full\n"
        "OPC UA|4840|-|-|full\n"
        "PCWorx|1962|-|-|port-only\n"
        "ProConOS|20547|20547|-|port-only\n"
        "PROFINET|34962-34964|34962-34964|-|full\n"
        "S7comm|102|-|-|full\n"
        "Zigbee IP|17754-17756|17754-17756|-|full\n";
    std::istringstream in(catalog);
    return protocol_registry::from_text(in);
  }();
  return reg;
}

protocol_registry protocol_registry::from_text(std::istream& in) {
  protocol_registry reg;
  reg.entries_.resize(protocol_count);
  std::vector<bool> seen(protocol_count, false);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '|'))
      fields.push_back(f);
    if (fields.size() != 5)
      throw std::runtime_error("registry: line " + std::to_string(lineno) +
                               ": expected 5 '|'-separated fields");
    auto p = parse_protocol(fields[0]);
    if (!p)
      throw std::runtime_error("registry: unknown protocol '" + fields[0] + "'");
    registry_entry e;
    e.protocol = *p;
    e.tcp_ports = parse_ranges(fields[1]);
    e.udp_ports = parse_ranges(fields[2]);
    for (const auto& r : parse_ranges(fields[3]))
      for (uint32_t port = r.lo; port <= r.hi; ++port)
        e.secure_ports.push_back(uint16_t(port));
    if (fields[4] == "full")
      e.tier = dissector_tier::full;
    else if (fields[4] == "port-only")
      e.tier = dissector_tier::port_only;
    else
      throw std::runtime_error("registry: bad tier '" + fields[4] + "'");
    for (uint16_t sp : e.secure_ports)
      if (!e.has_port(sp, transport::tcp) && !e.has_port(sp, transport::udp))
        throw std::runtime_error("registry: secure port " + std::to_string(sp) +
                                 " outside ranges of " + fields[0]);
    seen[size_t(*p)] = true;
    reg.entries_[size_t(*p)] = std::move(e);
  }
  for (size_t i = 0; i < protocol_count; ++i)
    if (!seen[i])
      throw std::runtime_error(std::string("registry: missing protocol ") +
                               std::string(names[i]));
  return reg;
}

protocol_registry protocol_registry::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("registry: cannot open " + path);
  return from_text(in);
}

std::vector<protocol_id> protocol_registry::lookup(uint16_t port,
                                                   transport tr) const {
  std::vector<protocol_id> out;
  for (const auto& e : entries_)
    if (e.has_port(port, tr))
      out.push_back(e.protocol);
  return out;
}

bool protocol_registry::is_secure_port(protocol_id p, uint16_t port) const {
  const auto& e = entry(p);
  if (!e.has_port(port, transport::tcp) && !e.has_port(port, transport::udp))
    throw std::domain_error("port " + std::to_string(port) +
                            " outside the ranges of " +
                            std::string(protocol_name(p)));
  return std::find(e.secure_ports.begin(), e.secure_ports.end(), port) !=
         e.secure_ports.end();
}

const registry_entry& protocol_registry::entry(protocol_id p) const {
  return entries_.at(size_t(p));
}

bool protocol_registry::port_matches(uint16_t src_port, uint16_t dst_port,
                                     transport tr) const {
  if (tr != transport::tcp && tr != transport::udp)
    return false;
  for (const auto& e : entries_)
    if (e.has_port(src_port, tr) || e.has_port(dst_port, tr))
      return true;
  return false;
}

void protocol_registry::dump(std::ostream& out) const {
  for (const auto& e : entries_) {
    std::vector<port_range> secure;
    for (uint16_t p : e.secure_ports)
      secure.push_back({p, p});
    out << protocol_name(e.protocol) << '|' << format_ranges(e.tcp_ports)
        << '|' << format_ranges(e.udp_ports) << '|' << format_ranges(secure)
        << '|' << (e.tier == dissector_tier::full ? "full" : "port-only")
        << '\n';
  }
}

} // namespace icsmon
