#include "icsmon/asmap.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "icsmon/pseudonym.hpp"

namespace icsmon {

namespace {

uint32_t mask_for(int len) {
  return len == 0 ? 0 : ~uint32_t(0) << (32 - len);
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  return s.substr(b, e - b + 1);
}

} // namespace

as_map as_map::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open AS map " + path);
  return from_text(in);
}

as_map as_map::from_text(std::istream& in) {
  as_map map;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#')
      continue;
    std::stringstream ss(line);
    std::string cidr, asn_s, area_s;
    if (!std::getline(ss, cidr, ',') || !std::getline(ss, asn_s, ',') ||
        !std::getline(ss, area_s, ','))
      throw std::runtime_error("as map line " + std::to_string(lineno) +
                               ": expected 'CIDR, ASN, area'");
    cidr = strip(cidr);
    auto slash = cidr.find('/');
    if (slash == std::string::npos)
      throw std::runtime_error("as map line " + std::to_string(lineno) +
                               ": missing '/len' in " + cidr);
    auto ip = parse_ipv4(cidr.substr(0, slash));
    int len = std::stoi(cidr.substr(slash + 1));
    if (!ip || len < 0 || len > 32)
      throw std::runtime_error("as map line " + std::to_string(lineno) +
                               ": bad prefix " + cidr);
    uint32_t asn = uint32_t(std::stoul(strip(asn_s)));
    bool area = std::stoi(strip(area_s)) != 0;
    map.add(*ip, len, asn, area);
  }
  return map;
}

void as_map::add(uint32_t prefix, int prefix_len, uint32_t asn, bool area) {
  tables_[prefix_len][prefix & mask_for(prefix_len)] = {asn, area};
  ++count_;
}

as_info as_map::lookup(uint32_t ip) const {
  for (int len = 32; len >= 0; --len) {
    const auto& t = tables_[len];
    if (t.empty())
      continue;
    auto it = t.find(ip & mask_for(len));
    if (it != t.end())
      return it->second;
  }
  return {};
}

} // namespace icsmon
