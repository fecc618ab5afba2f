#include "icsmon/pseudonym.hpp"

#include <sodium.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace icsmon {

namespace {

constexpr int feistel_rounds = 6;

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0)
    throw std::runtime_error("libsodium initialization failed");
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

} // namespace

std::optional<uint32_t> parse_ipv4(const std::string& dotted) {
  unsigned a, b, c, d;
  char tail;
  if (std::sscanf(dotted.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4)
    return std::nullopt;
  if (a > 255 || b > 255 || c > 255 || d > 255)
    return std::nullopt;
  return (a << 24) | (b << 16) | (c << 8) | d;
}

std::string format_ipv4(uint32_t ip) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", ip >> 24, (ip >> 16) & 0xff,
                (ip >> 8) & 0xff, ip & 0xff);
  return buf;
}

pseudonym_key pseudonym_key::from_hex(const std::string& hex32) {
  if (hex32.size() != 32)
    throw std::runtime_error("pseudonym key must be 32 hex digits (128 bits)");
  pseudonym_key k;
  for (size_t i = 0; i < 16; ++i) {
    int hi = hex_digit(hex32[2 * i]);
    int lo = hex_digit(hex32[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw std::runtime_error("pseudonym key contains a non-hex character");
    k.bytes[i] = uint8_t(hi << 4 | lo);
  }
  return k;
}

pseudonym_key pseudonym_key::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open key file " + path);
  std::string hex;
  in >> hex;
  return from_hex(hex);
}

pseudonym_key pseudonym_key::from_env(const std::string& var) {
  const char* v = std::getenv(var.c_str());
  if (!v)
    throw std::runtime_error("environment variable " + var + " not set");
  return from_hex(v);
}

pseudonymizer::pseudonymizer(const pseudonym_key& key) : key_(key) {
  ensure_sodium();
}

uint32_t pseudonymizer::permute(uint32_t ip) const {
  uint16_t left = uint16_t(ip >> 16);
  uint16_t right = uint16_t(ip & 0xffff);
  for (int round = 0; round < feistel_rounds; ++round) {
    uint8_t msg[3] = {uint8_t(round), uint8_t(right >> 8), uint8_t(right)};
    uint8_t mac[crypto_shorthash_BYTES];
    crypto_shorthash(mac, msg, sizeof msg, key_.bytes.data());
    uint16_t f = uint16_t(mac[0] << 8 | mac[1]);
    uint16_t next = left ^ f;
    left = right;
    right = next;
  }
  return uint32_t(left) << 16 | right;
}

std::string pseudonymizer::pseudonym(uint32_t ip) const {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", permute(ip));
  return buf;
}

std::string pseudonymizer::pseudonym(const std::string& dotted) const {
  auto ip = parse_ipv4(dotted);
  if (!ip)
    throw std::runtime_error("not an IPv4 address: " + dotted);
  return pseudonym(*ip);
}

} // namespace icsmon
