#include "icsmon/digest.hpp"

#include <sodium.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace icsmon {

namespace {

std::string hex_of(const unsigned char (&digest)[crypto_hash_sha256_BYTES]) {
  static const char* alphabet = "0123456789abcdef";
  std::string out;
  out.reserve(2 * crypto_hash_sha256_BYTES);
  for (unsigned char b : digest) {
    out.push_back(alphabet[b >> 4]);
    out.push_back(alphabet[b & 0x0f]);
  }
  return out;
}

} // namespace

std::string sha256_hex(const uint8_t* data, size_t len) {
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, data, len);
  return hex_of(digest);
}

std::string sha256_hex(const std::vector<uint8_t>& data) {
  return sha256_hex(data.data(), data.size());
}

std::string sha256_hex(const std::string& data) {
  return sha256_hex(reinterpret_cast<const uint8_t*>(data.data()),
                    data.size());
}

std::string sha256_file(const std::string& path) {
  struct file_closer {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  std::unique_ptr<std::FILE, file_closer> file(
      std::fopen(path.c_str(), "rb"));
  if (!file)
    throw std::runtime_error("digest: cannot open " + path);

  crypto_hash_sha256_state state;
  crypto_hash_sha256_init(&state);
  uint8_t buf[16384];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, file.get())) > 0)
    crypto_hash_sha256_update(&state, buf, got);
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256_final(&state, digest);
  return hex_of(digest);
}

} // namespace icsmon
