#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace icsmon {

struct pcap_packet {
  int64_t ts_sec = 0;
  uint32_t ts_nsec = 0;
  uint32_t original_len = 0;
  std::vector<uint8_t> data;
};

/// Classic pcap reader. Handles both byte orders and both the microsecond
/// (0xa1b2c3d4) and nanosecond (0xa1b23c4d) magic numbers.
class pcap_reader {
 public:
  bool open(const std::string& path);
  bool next(pcap_packet& out);
  uint32_t linktype() const { return linktype_; }
  uint32_t snaplen() const { return snaplen_; }
  const std::string& error() const { return error_; }

 private:
  struct file_closer {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  std::unique_ptr<std::FILE, file_closer> file_;
  bool swap_ = false;
  bool nanos_ = false;
  uint32_t linktype_ = 0;
  uint32_t snaplen_ = 0;
  std::string error_;
};

/// Classic pcap writer (little-endian, linktype EN10MB). Frames longer than
/// the snap length are truncated on write.
class pcap_writer {
 public:
  bool open(const std::string& path, uint32_t snaplen = 65535,
            bool nanosecond = false);
  void write(int64_t ts_sec, uint32_t ts_nsec,
             const std::vector<uint8_t>& frame, uint32_t original_len = 0);
  void close();
  uint64_t packets_written() const { return packets_; }

 private:
  struct file_closer {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  std::unique_ptr<std::FILE, file_closer> file_;
  uint32_t snaplen_ = 65535;
  bool nanos_ = false;
  uint64_t packets_ = 0;
};

} // namespace icsmon
