#include "icsmon/classify.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "icsmon/dissect.hpp"
#include "icsmon/itproto.hpp"
#include "icsmon/probes.hpp"

namespace icsmon {

std::string_view to_string(verdict_label l) {
  switch (l) {
  case verdict_label::legitimate_ics:
    return "LegitimateICS";
  case verdict_label::ics_scanner:
    return "IcsScanner";
  case verdict_label::non_ics:
    return "NonICS";
  case verdict_label::indeterminate:
    return "Indeterminate";
  }
  return "NonICS";
}

std::optional<verdict_label> parse_verdict_label(std::string_view name) {
  if (name == "LegitimateICS")
    return verdict_label::legitimate_ics;
  if (name == "IcsScanner")
    return verdict_label::ics_scanner;
  if (name == "NonICS")
    return verdict_label::non_ics;
  if (name == "Indeterminate")
    return verdict_label::indeterminate;
  return std::nullopt;
}

std::string_view to_string(basis_tag t) {
  switch (t) {
  case basis_tag::port_match:
    return "PortMatch";
  case basis_tag::dissect_ok:
    return "DissectOk";
  case basis_tag::cross_validated:
    return "CrossValidated";
  case basis_tag::intel_scanner:
    return "IntelScanner";
  case basis_tag::probe_signature:
    return "ProbeSignature";
  case basis_tag::it_recognized:
    return "ItRecognized";
  }
  return "PortMatch";
}

std::optional<scanner_basis> parse_scanner_basis(std::string_view name) {
  if (name == "intel")
    return scanner_basis::intel;
  if (name == "intel+sig")
    return scanner_basis::intel_and_signatures;
  return std::nullopt;
}

bool verdict::has(basis_tag t) const {
  return std::find(basis.begin(), basis.end(), t) != basis.end();
}

bool pipeline_accounting::identities_hold() const {
  if (after_port_filter > total)
    return false;
  if (s1_dissected > after_port_filter)
    return false;
  if (s1_crossvalidated > s1_dissected)
    return false;
  if (s1_scanner > s1_crossvalidated)
    return false;
  if (s1_legitimate != s1_crossvalidated - s1_scanner)
    return false;
  if (s2_residual != after_port_filter - s1_dissected)
    return false;
  if (s2_crossvalidated > s2_residual)
    return false;
  if (s2_scanner > s2_crossvalidated)
    return false;
  if (s3_total_scanners != s1_scanner + s2_scanner)
    return false;
  if (s3_total_ics != s1_legitimate + s3_total_scanners)
    return false;
  return true;
}

classify_result classify_packets(const std::vector<sampled_packet>& packets,
                                 const protocol_registry& registry,
                                 const intel_db& intel,
                                 const classify_options& opts) {
  classify_result out;
  out.verdicts.reserve(packets.size());
  auto& acc = out.accounting;

  uint64_t it_dropped = 0;
  for (size_t i = 0; i < packets.size(); ++i) {
    const auto& pkt = packets[i];
    ++acc.total;

    verdict v;
    v.packet_index = i;

    auto dis = dissect_packet(pkt, registry);
    if (dis.empty()) {
      v.label = verdict_label::non_ics;
      out.verdicts.push_back(std::move(v));
      continue;
    }

    ++acc.after_port_filter;
    v.basis.push_back(basis_tag::port_match);

    auto wf = std::find_if(dis.begin(), dis.end(), [](const dissection& d) {
      return d.result == dissect_result::well_formed;
    });

    if (wf != dis.end()) {
      // Step 1: well-formed industrial payloads.
      ++acc.s1_dissected;
      v.basis.push_back(basis_tag::dissect_ok);
      if (is_specific(recognize_it(pkt))) {
        v.basis.push_back(basis_tag::it_recognized);
        v.label = verdict_label::non_ics;
        ++it_dropped;
        out.verdicts.push_back(std::move(v));
        continue;
      }
      ++acc.s1_crossvalidated;
      v.basis.push_back(basis_tag::cross_validated);
      if (intel.contains(pkt.src.pseudonym)) {
        ++acc.s1_scanner;
        v.basis.push_back(basis_tag::intel_scanner);
        v.label = verdict_label::ics_scanner;
      } else {
        ++acc.s1_legitimate;
        v.label = verdict_label::legitimate_ics;
      }
      v.protocol = wf->proto;
      out.verdicts.push_back(std::move(v));
      continue;
    }

    // Step 2: port-matched residual.
    ++acc.s2_residual;
    if (is_specific(recognize_it(pkt))) {
      v.basis.push_back(basis_tag::it_recognized);
      v.label = verdict_label::non_ics;
      ++it_dropped;
      out.verdicts.push_back(std::move(v));
      continue;
    }
    ++acc.s2_crossvalidated;
    v.basis.push_back(basis_tag::cross_validated);

    bool intel_hit = intel.contains(pkt.src.pseudonym);
    protocol_id probe_proto = dis.front().proto;
    probe_kind probe = probe_kind::none;
    for (const auto& d : dis) {
      auto k = match_probe(pkt, d.proto);
      if (is_scanner_probe(k)) {
        probe = k;
        probe_proto = d.proto;
        break;
      }
    }

    if (intel_hit)
      v.basis.push_back(basis_tag::intel_scanner);
    if (is_scanner_probe(probe))
      v.basis.push_back(basis_tag::probe_signature);

    bool sig_counts = opts.basis == scanner_basis::intel_and_signatures;
    if (intel_hit || (sig_counts && is_scanner_probe(probe))) {
      ++acc.s2_scanner;
      v.label = verdict_label::ics_scanner;
      v.protocol = probe_proto;
    } else {
      v.label = verdict_label::indeterminate;
      v.protocol = dis.front().proto;
    }
    out.verdicts.push_back(std::move(v));
  }

  acc.s3_total_scanners = acc.s1_scanner + acc.s2_scanner;
  acc.s3_total_ics = acc.s1_legitimate + acc.s3_total_scanners;

  uint64_t indeterminate = acc.s2_crossvalidated - acc.s2_scanner;
  if (acc.s1_legitimate + acc.s3_total_scanners + indeterminate + it_dropped !=
      acc.after_port_filter)
    throw std::logic_error("classify: labels do not partition the "
                           "port-matched packets");
  if (!acc.identities_hold())
    throw std::logic_error("classify: accounting identities violated");

  return out;
}

std::vector<host_role> host_roles(const std::vector<sampled_packet>& packets,
                                  const std::vector<verdict>& verdicts,
                                  double min_rate_per_min) {
  std::map<std::string, host_role> roles;
  auto role_of = [&roles](const std::string& host) -> host_role& {
    auto [it, fresh] = roles.try_emplace(host);
    if (fresh)
      it->second.host = host;
    return it->second;
  };

  for (const auto& v : verdicts) {
    const auto& pkt = packets.at(v.packet_index);
    if (v.label == verdict_label::legitimate_ics && v.protocol) {
      role_of(pkt.src.pseudonym).protocols_legitimate.insert(*v.protocol);
      role_of(pkt.dst.pseudonym).protocols_legitimate.insert(*v.protocol);
    } else if (v.label == verdict_label::ics_scanner && v.protocol) {
      role_of(pkt.src.pseudonym).protocols_scanned.insert(*v.protocol);
    }
  }

  for (const auto& v : verdicts) {
    if (v.label != verdict_label::non_ics)
      continue;
    const auto& pkt = packets.at(v.packet_index);
    if (auto it = roles.find(pkt.src.pseudonym); it != roles.end())
      it->second.has_it_traffic = true;
    if (auto it = roles.find(pkt.dst.pseudonym); it != roles.end())
      it->second.has_it_traffic = true;
  }

  if (min_rate_per_min > 0 && !packets.empty()) {
    auto lo = packets.front().ts_sec, hi = packets.front().ts_sec;
    std::map<std::string, double> original_packets;
    for (const auto& pkt : packets) {
      lo = std::min(lo, pkt.ts_sec);
      hi = std::max(hi, pkt.ts_sec);
      double scale = pkt.rate_reciprocal > 0 ? double(pkt.rate_reciprocal) : 1.0;
      original_packets[pkt.src.pseudonym] += scale;
      original_packets[pkt.dst.pseudonym] += scale;
    }
    double window_min = std::max(1.0, double(hi - lo) / 60.0);
    for (auto it = roles.begin(); it != roles.end();) {
      double est = original_packets[it->first] / window_min;
      it = est < min_rate_per_min ? roles.erase(it) : std::next(it);
    }
  }

  std::vector<host_role> out;
  out.reserve(roles.size());
  for (auto& [_, role] : roles)
    out.push_back(std::move(role));
  return out;
}

} // namespace icsmon
