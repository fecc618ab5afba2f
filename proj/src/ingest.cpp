#include "icsmon/ingest.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>

#include "icsmon/frame.hpp"
#include "icsmon/pcapio.hpp"

namespace icsmon {

host_id packet_tagger::tag_host(uint32_t ip) const {
  host_id h;
  h.pseudonym = pseud_.pseudonym(ip);
  as_info info = asmap_.lookup(ip);
  h.asn = info.asn;
  h.in_ixp_area = info.in_ixp_area;
  return h;
}

sampled_packet packet_tagger::tag(const std::vector<uint8_t>& frame,
                                  int64_t ts_sec, uint32_t ts_nsec,
                                  uint32_t original_len, uint32_t rate,
                                  const std::string& agent) const {
  const std::vector<uint8_t>* view = &frame;
  std::vector<uint8_t> truncated;
  if (frame.size() > snaplen_) {
    truncated.assign(frame.begin(), frame.begin() + snaplen_);
    view = &truncated;
  }

  sampled_packet pkt;
  pkt.ts_sec = ts_sec;
  pkt.ts_nsec = ts_nsec;
  pkt.captured_len = static_cast<uint16_t>(view->size());
  pkt.original_len = original_len ? original_len
                                  : static_cast<uint32_t>(frame.size());
  pkt.rate_reciprocal = rate;
  pkt.agent = agent;

  auto dec = parse_ethernet(*view);
  if (!dec)
    return pkt;
  pkt.tr = dec->tr;
  pkt.ip_proto = dec->ip_proto;
  pkt.src_port = dec->src_port;
  pkt.dst_port = dec->dst_port;
  pkt.tcp_flags = dec->tcp_flags;
  if (dec->has_ipv4) {
    pkt.src = tag_host(dec->src_ip);
    pkt.dst = tag_host(dec->dst_ip);
  }
  if (dec->payload_offset < view->size())
    pkt.payload.assign(view->begin() + dec->payload_offset, view->end());
  return pkt;
}

bool ingest_pcap(const std::string& path, const packet_tagger& tagger,
                 uint32_t rate, const std::string& agent,
                 std::vector<sampled_packet>& out, ingest_stats& stats,
                 std::string* error) {
  pcap_reader reader;
  if (!reader.open(path)) {
    if (error)
      *error = reader.error();
    return false;
  }
  if (reader.linktype() != 1) {
    if (error)
      *error = "unsupported linktype " + std::to_string(reader.linktype());
    return false;
  }
  pcap_packet pp;
  while (reader.next(pp)) {
    ++stats.samples_seen;
    stats.bytes_read += pp.data.size();
    auto pkt = tagger.tag(pp.data, pp.ts_sec, pp.ts_nsec, pp.original_len,
                          rate, agent);
    if (pkt.captured_len == 0) {
      ++stats.samples_rejected;
      continue;
    }
    ++stats.samples_decoded;
    out.push_back(std::move(pkt));
  }
  if (!reader.error().empty()) {
    if (error)
      *error = reader.error();
    return false;
  }
  return true;
}

void ingest_sflow_datagram(const uint8_t* data, size_t len,
                           const packet_tagger& tagger, int64_t ts_sec,
                           uint32_t ts_nsec, std::vector<sampled_packet>& out,
                           ingest_stats& stats) {
  std::string agent;
  auto records = decode_sflow_datagram(data, len, stats, &agent);
  for (const auto& rec : records)
    out.push_back(tagger.tag(rec.header, ts_sec, ts_nsec, rec.frame_length,
                             rec.sample_rate, agent));
}

bool ingest_sflow_file(const std::string& path, const packet_tagger& tagger,
                       std::vector<sampled_packet>& out, ingest_stats& stats,
                       std::string* error) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    if (error)
      *error = "cannot open " + path;
    return false;
  }
  uint64_t index = 0;
  std::vector<uint8_t> buf;
  for (;;) {
    uint8_t len_be[4];
    size_t got = std::fread(len_be, 1, 4, f);
    if (got == 0)
      break;
    if (got != 4) {
      std::fclose(f);
      if (error)
        *error = "truncated length prefix";
      return false;
    }
    uint32_t len = static_cast<uint32_t>(len_be[0]) << 24 |
                   static_cast<uint32_t>(len_be[1]) << 16 |
                   static_cast<uint32_t>(len_be[2]) << 8 | len_be[3];
    if (len > 0x10000) {
      std::fclose(f);
      if (error)
        *error = "datagram length exceeds 64 KiB";
      return false;
    }
    buf.resize(len);
    if (std::fread(buf.data(), 1, len, f) != len) {
      std::fclose(f);
      if (error)
        *error = "truncated datagram body";
      return false;
    }
    ingest_sflow_datagram(buf.data(), buf.size(), tagger,
                          static_cast<int64_t>(index), 0, out, stats);
    ++index;
  }
  std::fclose(f);
  return true;
}

bool write_sflow_file(const std::string& path,
                      const std::vector<std::vector<uint8_t>>& datagrams) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f)
    return false;
  for (const auto& d : datagrams) {
    uint32_t len = static_cast<uint32_t>(d.size());
    uint8_t len_be[4] = {static_cast<uint8_t>(len >> 24),
                         static_cast<uint8_t>(len >> 16 & 0xff),
                         static_cast<uint8_t>(len >> 8 & 0xff),
                         static_cast<uint8_t>(len & 0xff)};
    std::fwrite(len_be, 1, 4, f);
    std::fwrite(d.data(), 1, d.size(), f);
  }
  std::fclose(f);
  return true;
}

int64_t listen_sflow(uint16_t port, uint64_t max_datagrams,
                     const std::function<void(const std::vector<uint8_t>&,
                                              int64_t, uint32_t)>& on_datagram,
                     std::string* error) {
  int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) {
    if (error)
      *error = std::strerror(errno);
    return -1;
  }
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    if (error)
      *error = std::strerror(errno);
    ::close(fd);
    return -1;
  }

  std::vector<uint8_t> buf(65536);
  int64_t received = 0;
  while (max_datagrams == 0 ||
         static_cast<uint64_t>(received) < max_datagrams) {
    ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      break;
    }
    timespec ts{};
    clock_gettime(CLOCK_REALTIME, &ts);
    on_datagram(std::vector<uint8_t>(buf.begin(), buf.begin() + n), ts.tv_sec,
                static_cast<uint32_t>(ts.tv_nsec));
    ++received;
  }
  ::close(fd);
  return received;
}

} // namespace icsmon
