#include "icsmon/intel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace icsmon {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

} // namespace

std::string_view to_string(intel_class c) {
  switch (c) {
  case intel_class::unknown:
    return "unknown";
  case intel_class::benign:
    return "benign";
  case intel_class::malicious:
    return "malicious";
  }
  return "?";
}

std::optional<intel_class> parse_intel_class(std::string_view name) {
  std::string n = lower(name);
  if (n == "unknown")
    return intel_class::unknown;
  if (n == "benign")
    return intel_class::benign;
  if (n == "malicious")
    return intel_class::malicious;
  return std::nullopt;
}

bool intel_db::add(intel_record rec) {
  if (rec.cls != intel_class::unknown && rec.provenance.empty())
    return false;
  auto it = records_.find(rec.host);
  if (it == records_.end()) {
    records_.emplace(rec.host, std::move(rec));
    return true;
  }
  if (rec.last_seen >= it->second.last_seen)
    it->second = std::move(rec);
  return true;
}

const intel_record* intel_db::lookup(const std::string& host) const {
  auto it = records_.find(host);
  return it == records_.end() ? nullptr : &it->second;
}

intel_db intel_db::from_stream(std::istream& in, const pseudonymizer* pseud,
                               std::vector<std::string>* errors) {
  intel_db db;
  std::string line;
  size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    if (errors)
      errors->push_back("line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail("not a JSON object");
      continue;
    }
    intel_record rec;
    if (!j.contains("host") || !j["host"].is_string()) {
      fail("missing host");
      continue;
    }
    rec.host = j["host"].get<std::string>();
    if (auto ip = parse_ipv4(rec.host)) {
      if (pseud)
        rec.host = pseud->pseudonym(*ip);
    }
    if (!j.contains("classification") || !j["classification"].is_string()) {
      fail("missing classification");
      continue;
    }
    auto cls = parse_intel_class(j["classification"].get<std::string>());
    if (!cls) {
      fail("unknown classification '" +
           j["classification"].get<std::string>() + "'");
      continue;
    }
    rec.cls = *cls;
    if (j.contains("actor") && j["actor"].is_string())
      rec.actor = j["actor"].get<std::string>();
    if (j.contains("country") && j["country"].is_string())
      rec.country = j["country"].get<std::string>();
    if (j.contains("last_seen") && j["last_seen"].is_string())
      rec.last_seen = j["last_seen"].get<std::string>();
    if (j.contains("provenance") && j["provenance"].is_string())
      rec.provenance = j["provenance"].get<std::string>();
    if (!db.add(std::move(rec)))
      fail("benign/malicious verdicts require a provenance note");
  }
  return db;
}

intel_db intel_db::from_file(const std::string& path, const pseudonymizer* pseud,
                             std::vector<std::string>* errors) {
  std::ifstream in(path);
  if (!in) {
    if (errors)
      errors->push_back("cannot open " + path);
    return {};
  }
  return from_stream(in, pseud, errors);
}

actor_breakdown_result actor_breakdown(const std::vector<std::string>& hosts,
                                       const intel_db& db, size_t top_k) {
  std::set<std::string> uniq(hosts.begin(), hosts.end());
  actor_breakdown_result out;
  out.total_hosts = uniq.size();
  if (uniq.empty())
    return out;

  std::map<std::string, uint64_t> per_actor;
  uint64_t malicious = 0, benign = 0, unknown = 0;
  for (const auto& h : uniq) {
    const intel_record* rec = db.lookup(h);
    std::string actor = rec && !rec->actor.empty() ? rec->actor : "unknown";
    ++per_actor[actor];
    intel_class cls = rec ? rec->cls : intel_class::unknown;
    if (cls == intel_class::malicious)
      ++malicious;
    else if (cls == intel_class::benign)
      ++benign;
    else
      ++unknown;
  }

  out.top_actors.reserve(per_actor.size());
  for (const auto& [actor, count] : per_actor) {
    actor_share s;
    s.actor = actor;
    s.hosts = count;
    s.share_pct = 100.0 * static_cast<double>(count) /
                  static_cast<double>(out.total_hosts);
    out.top_actors.push_back(std::move(s));
  }
  std::stable_sort(out.top_actors.begin(), out.top_actors.end(),
                   [](const actor_share& a, const actor_share& b) {
                     return a.hosts > b.hosts;
                   });
  if (top_k > 0 && out.top_actors.size() > top_k)
    out.top_actors.resize(top_k);

  double total = static_cast<double>(out.total_hosts);
  out.malicious_pct = 100.0 * static_cast<double>(malicious) / total;
  out.benign_pct = 100.0 * static_cast<double>(benign) / total;
  out.unknown_pct = 100.0 * static_cast<double>(unknown) / total;
  return out;
}

std::map<std::string, uint64_t> geo_counts(const std::vector<std::string>& hosts,
                                           const intel_db& db) {
  std::set<std::string> uniq(hosts.begin(), hosts.end());
  std::map<std::string, uint64_t> out;
  for (const auto& h : uniq) {
    const intel_record* rec = db.lookup(h);
    if (!rec || rec->cls != intel_class::malicious)
      continue;
    ++out[rec->country.empty() ? "??" : rec->country];
  }
  return out;
}

} // namespace icsmon
