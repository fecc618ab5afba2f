#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace icsmon {

std::optional<uint32_t> parse_ipv4(const std::string& dotted);
std::string format_ipv4(uint32_t ip);

/// 128-bit secret for host pseudonymization. One key per analysis run; the
/// same key on both the traffic and the baseline side keeps intersections
/// computable.
struct pseudonym_key {
  std::array<uint8_t, 16> bytes{};

  static pseudonym_key from_hex(const std::string& hex32);
  static pseudonym_key from_file(const std::string& path);
  static pseudonym_key from_env(const std::string& var);
};

/// Keyed permutation of the IPv4 space: a balanced 16/16 Feistel network
/// whose round function is SipHash-2-4 under per-round tweaks of the key.
/// Injective by construction, deterministic for a fixed key.
class pseudonymizer {
public:
  explicit pseudonymizer(const pseudonym_key& key);

  uint32_t permute(uint32_t ip) const;

  /// 8 lowercase hex digits of the permuted address.
  std::string pseudonym(uint32_t ip) const;
  std::string pseudonym(const std::string& dotted) const;

private:
  pseudonym_key key_;
};

} // namespace icsmon
