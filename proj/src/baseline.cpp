#include "icsmon/baseline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace icsmon {

namespace {

using nlohmann::json;

std::string normalized(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

// Tag attribution: a tag names a protocol when its normalized form prefixes
// the normalized protocol name ("modbus" -> Modbus/TCP, "s7" -> S7comm).
std::vector<protocol_id> protocols_for_tag(const protocol_registry& registry,
                                           std::string_view tag) {
  std::vector<protocol_id> out;
  std::string t = normalized(tag);
  if (t.empty())
    return out;
  for (const auto& e : registry.entries()) {
    std::string name = normalized(protocol_name(e.protocol));
    if (name.size() >= t.size() && name.compare(0, t.size(), t) == 0)
      out.push_back(e.protocol);
  }
  return out;
}

transport parse_transport_field(const json& rec) {
  if (!rec.contains("transport"))
    return transport::tcp;
  std::string t = rec.at("transport").get<std::string>();
  if (t == "tcp")
    return transport::tcp;
  if (t == "udp")
    return transport::udp;
  throw std::runtime_error("transport must be tcp or udp");
}

} // namespace

baseline_import_result import_baseline(std::istream& in, const as_map& amap,
                                       const pseudonymizer& ps,
                                       const protocol_registry& registry,
                                       const baseline_import_options& opts) {
  baseline_import_result result;
  std::unordered_map<std::string, size_t> index; // pseudonym -> hosts slot
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& why) {
      result.errors.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    std::string t = line;
    if (t.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    ++result.records_seen;

    json rec = json::parse(t, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      fail("not a JSON object");
      continue;
    }
    try {
      std::string ip_text = rec.at("ip").get<std::string>();
      auto ip = parse_ipv4(ip_text);
      if (!ip)
        throw std::runtime_error("bad IPv4 address");

      as_info as = amap.lookup(*ip);
      if (opts.area_only && !as.in_ixp_area) {
        ++result.records_dropped_area;
        continue;
      }

      baseline_host parsed;
      parsed.host.pseudonym = ps.pseudonym(*ip);
      parsed.host.asn = as.asn;
      parsed.host.in_ixp_area = as.in_ixp_area;

      const json& ports = rec.at("ports");
      if (!ports.is_array() || ports.empty())
        throw std::runtime_error("ports must be a non-empty array");
      for (const json& p : ports) {
        int port = p.at("port").get<int>();
        if (port < 0 || port > 65535)
          throw std::runtime_error("bad port");
        transport tr = parse_transport_field(p);
        parsed.open_ports.insert({static_cast<uint16_t>(port), tr});
        for (protocol_id proto :
             registry.lookup(static_cast<uint16_t>(port), tr))
          parsed.protocols.insert(proto);
        // Banners carry no protocol evidence except the tank-gauge marker.
        if (port == 10001 && p.contains("banner") &&
            p.at("banner").get<std::string>().find("I20100") !=
                std::string::npos)
          parsed.protocols.insert(protocol_id::atg);
        if (p.contains("product")) {
          std::string product = p.at("product").get<std::string>();
          if (!product.empty())
            parsed.products.push_back(product);
        }
        if (p.contains("cves")) {
          for (const json& c : p.at("cves")) {
            std::string id = c.at("id").get<std::string>();
            double score = c.at("cvss").get<double>();
            if (score < 0.0 || score > 10.0)
              throw std::runtime_error("CVSS score out of range: " + id);
            parsed.cves.emplace_back(id, score);
          }
        }
      }
      if (rec.contains("tags"))
        for (const json& tag : rec.at("tags"))
          for (protocol_id proto :
               protocols_for_tag(registry, tag.get<std::string>()))
            parsed.protocols.insert(proto);

      auto [it, fresh] =
          index.try_emplace(parsed.host.pseudonym, result.hosts.size());
      if (fresh) {
        result.hosts.push_back(std::move(parsed));
      } else {
        baseline_host& merged = result.hosts[it->second];
        merged.protocols.insert(parsed.protocols.begin(),
                                parsed.protocols.end());
        merged.open_ports.insert(parsed.open_ports.begin(),
                                 parsed.open_ports.end());
        for (auto& product : parsed.products)
          if (std::find(merged.products.begin(), merged.products.end(),
                        product) == merged.products.end())
            merged.products.push_back(std::move(product));
        for (auto& cve : parsed.cves)
          if (std::find(merged.cves.begin(), merged.cves.end(), cve) ==
              merged.cves.end())
            merged.cves.push_back(std::move(cve));
      }
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  return result;
}

baseline_import_result import_baseline_file(const std::string& path,
                                            const as_map& amap,
                                            const pseudonymizer& ps,
                                            const protocol_registry& registry,
                                            const baseline_import_options& opts) {
  std::ifstream in(path);
  if (!in.good())
    throw std::runtime_error("cannot open baseline export: " + path);
  return import_baseline(in, amap, ps, registry, opts);
}

baseline_comparison compare(const std::vector<host_role>& observed,
                            const std::vector<baseline_host>& baseline) {
  baseline_comparison out;

  // group -> host pseudonyms on each side
  std::map<std::string, std::set<std::string>> h_side;
  std::map<std::string, std::set<std::string>> s_side;
  std::set<std::string> h_all;
  std::set<std::string> s_all;

  for (const host_role& role : observed) {
    if (role.protocols_legitimate.empty())
      continue;
    h_all.insert(role.host);
    for (protocol_id proto : role.protocols_legitimate)
      h_side[std::string(report_group(proto))].insert(role.host);
  }
  for (const baseline_host& bh : baseline) {
    if (bh.protocols.empty())
      continue;
    s_all.insert(bh.host.pseudonym);
    for (protocol_id proto : bh.protocols)
      s_side[std::string(report_group(proto))].insert(bh.host.pseudonym);
  }

  for (const std::string& group : all_report_groups()) {
    auto hit = h_side.find(group);
    auto sit = s_side.find(group);
    protocol_comparison row;
    row.h = hit == h_side.end() ? 0 : hit->second.size();
    row.h_s = sit == s_side.end() ? 0 : sit->second.size();
    if (hit != h_side.end() && sit != s_side.end())
      for (const std::string& host : hit->second)
        row.i += sit->second.count(host);
    out.per_protocol[group] = row;
  }

  out.unique_h = h_all.size();
  out.unique_h_s = s_all.size();
  for (const std::string& host : h_all)
    out.unique_i += s_all.count(host);
  return out;
}

std::string_view to_string(severity_bucket b) {
  switch (b) {
  case severity_bucket::low:
    return "Low";
  case severity_bucket::medium:
    return "Medium";
  default:
    return "High";
  }
}

severity_bucket cvss_bucket(double score) {
  if (!(score >= 0.0) || score > 10.0)
    throw std::out_of_range("CVSS v2 score must lie in [0, 10]");
  if (score < 4.0)
    return severity_bucket::low;
  if (score < 7.0)
    return severity_bucket::medium;
  return severity_bucket::high;
}

exposure_report exposure(const std::vector<host_role>& observed,
                         const std::vector<baseline_host>& baseline,
                         const protocol_registry& registry,
                         size_t top_k) {
  exposure_report rep;

  std::unordered_map<std::string, const baseline_host*> by_pseudonym;
  for (const baseline_host& bh : baseline)
    by_pseudonym.emplace(bh.host.pseudonym, &bh);

  std::vector<const baseline_host*> identified;
  for (const host_role& role : observed) {
    if (role.protocols_legitimate.empty())
      continue;
    ++rep.observed_hosts;
    auto it = by_pseudonym.find(role.host);
    if (it != by_pseudonym.end())
      identified.push_back(it->second);
  }
  rep.identified = identified.size();
  if (rep.observed_hosts > 0)
    rep.identified_pct = 100.0 * static_cast<double>(rep.identified) /
                         static_cast<double>(rep.observed_hosts);

  std::map<std::string, uint64_t> product_hosts;
  std::map<std::string, uint64_t> port_hosts;
  for (const baseline_host* bh : identified) {
    bool ics_port = false;
    std::set<std::string> port_names;
    for (const auto& [port, tr] : bh->open_ports) {
      if (!registry.lookup(port, tr).empty())
        ics_port = true;
      port_names.insert(std::to_string(port) + "/" + to_string(tr));
    }
    if (ics_port)
      ++rep.with_ics_ports;
    for (const std::string& name : port_names)
      ++port_hosts[name];
    std::set<std::string> seen(bh->products.begin(), bh->products.end());
    for (const std::string& product : seen)
      ++product_hosts[product];
    if (!bh->cves.empty())
      ++rep.hosts_with_cves;
    for (const auto& [id, score] : bh->cves) {
      ++rep.cve_total;
      ++rep.cve_buckets[cvss_bucket(score)];
    }
  }
  if (rep.identified > 0)
    rep.with_ics_ports_pct = 100.0 * static_cast<double>(rep.with_ics_ports) /
                             static_cast<double>(rep.identified);

  auto top_of = [&](const std::map<std::string, uint64_t>& counts) {
    std::vector<std::pair<std::string, uint64_t>> rows(counts.begin(),
                                                       counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& z) {
      if (a.second != z.second)
        return a.second > z.second;
      return a.first < z.first;
    });
    if (top_k > 0 && rows.size() > top_k)
      rows.resize(top_k);
    std::vector<std::pair<std::string, double>> shares;
    for (const auto& [name, count] : rows)
      shares.emplace_back(name, 100.0 * static_cast<double>(count) /
                                    static_cast<double>(rep.identified));
    return shares;
  };
  if (rep.identified > 0) {
    rep.top_products = top_of(product_hosts);
    rep.top_ports = top_of(port_hosts);
  }
  return rep;
}

} // namespace icsmon
