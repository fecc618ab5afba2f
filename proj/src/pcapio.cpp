#include "icsmon/pcapio.hpp"

namespace icsmon {

namespace {

constexpr uint32_t magic_usec = 0xa1b2c3d4;
constexpr uint32_t magic_usec_swapped = 0xd4c3b2a1;
constexpr uint32_t magic_nsec = 0xa1b23c4d;
constexpr uint32_t magic_nsec_swapped = 0x4d3cb2a1;

uint32_t bswap(uint32_t x) {
  return x >> 24 | (x >> 8 & 0xff00) | (x << 8 & 0xff0000) | x << 24;
}

bool read_u32(std::FILE* f, bool swap, uint32_t& out) {
  uint8_t b[4];
  if (std::fread(b, 1, 4, f) != 4)
    return false;
  out = static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
        static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
  if (swap)
    out = bswap(out);
  return true;
}

void write_u32(std::FILE* f, uint32_t x) {
  uint8_t b[4] = {static_cast<uint8_t>(x & 0xff),
                  static_cast<uint8_t>(x >> 8 & 0xff),
                  static_cast<uint8_t>(x >> 16 & 0xff),
                  static_cast<uint8_t>(x >> 24)};
  std::fwrite(b, 1, 4, f);
}

void write_u16(std::FILE* f, uint16_t x) {
  uint8_t b[2] = {static_cast<uint8_t>(x & 0xff),
                  static_cast<uint8_t>(x >> 8)};
  std::fwrite(b, 1, 2, f);
}

} // namespace

bool pcap_reader::open(const std::string& path) {
  file_.reset(std::fopen(path.c_str(), "rb"));
  if (!file_) {
    error_ = "cannot open " + path;
    return false;
  }
  uint32_t magic = 0;
  if (!read_u32(file_.get(), false, magic)) {
    error_ = "short pcap header";
    return false;
  }
  switch (magic) {
    case magic_usec: swap_ = false; nanos_ = false; break;
    case magic_usec_swapped: swap_ = true; nanos_ = false; break;
    case magic_nsec: swap_ = false; nanos_ = true; break;
    case magic_nsec_swapped: swap_ = true; nanos_ = true; break;
    default:
      error_ = "not a classic pcap file";
      return false;
  }
  // The writer stores fields in host order; the magic we just matched tells
  // us whether that order differs from ours. On little-endian hosts the
  // unswapped magic reads back byte-reversed, so flip the flag.
  uint8_t probe[4] = {0xd4, 0xc3, 0xb2, 0xa1};
  uint32_t as_le = static_cast<uint32_t>(probe[0]) |
                   static_cast<uint32_t>(probe[1]) << 8 |
                   static_cast<uint32_t>(probe[2]) << 16 |
                   static_cast<uint32_t>(probe[3]) << 24;
  bool host_le = as_le == magic_usec;
  swap_ = swap_ == host_le;

  uint32_t ver = 0, zone = 0, sigfigs = 0;
  if (!read_u32(file_.get(), swap_, ver) ||
      !read_u32(file_.get(), swap_, zone) ||
      !read_u32(file_.get(), swap_, sigfigs) ||
      !read_u32(file_.get(), swap_, snaplen_) ||
      !read_u32(file_.get(), swap_, linktype_)) {
    error_ = "short pcap header";
    return false;
  }
  return true;
}

bool pcap_reader::next(pcap_packet& out) {
  if (!file_)
    return false;
  uint32_t sec = 0, frac = 0, incl = 0, orig = 0;
  if (!read_u32(file_.get(), swap_, sec))
    return false; // EOF
  if (!read_u32(file_.get(), swap_, frac) ||
      !read_u32(file_.get(), swap_, incl) ||
      !read_u32(file_.get(), swap_, orig)) {
    error_ = "truncated record header";
    return false;
  }
  if (incl > 0x4000000) { // 64 MiB sanity cap
    error_ = "implausible record length";
    return false;
  }
  out.ts_sec = sec;
  out.ts_nsec = nanos_ ? frac : frac * 1000u;
  out.original_len = orig;
  out.data.resize(incl);
  if (incl && std::fread(out.data.data(), 1, incl, file_.get()) != incl) {
    error_ = "truncated record body";
    return false;
  }
  return true;
}

bool pcap_writer::open(const std::string& path, uint32_t snaplen,
                       bool nanosecond) {
  file_.reset(std::fopen(path.c_str(), "wb"));
  if (!file_)
    return false;
  snaplen_ = snaplen;
  nanos_ = nanosecond;
  packets_ = 0;
  write_u32(file_.get(), nanos_ ? magic_nsec : magic_usec);
  write_u16(file_.get(), 2); // major
  write_u16(file_.get(), 4); // minor
  write_u32(file_.get(), 0); // thiszone
  write_u32(file_.get(), 0); // sigfigs
  write_u32(file_.get(), snaplen_);
  write_u32(file_.get(), 1); // LINKTYPE_ETHERNET
  return true;
}

void pcap_writer::write(int64_t ts_sec, uint32_t ts_nsec,
                        const std::vector<uint8_t>& frame,
                        uint32_t original_len) {
  if (!file_)
    return;
  uint32_t incl = static_cast<uint32_t>(frame.size());
  if (incl > snaplen_)
    incl = snaplen_;
  uint32_t orig = original_len ? original_len
                               : static_cast<uint32_t>(frame.size());
  write_u32(file_.get(), static_cast<uint32_t>(ts_sec));
  write_u32(file_.get(), nanos_ ? ts_nsec : ts_nsec / 1000u);
  write_u32(file_.get(), incl);
  write_u32(file_.get(), orig);
  std::fwrite(frame.data(), 1, incl, file_.get());
  ++packets_;
}

void pcap_writer::close() { file_.reset(); }

} // namespace icsmon
