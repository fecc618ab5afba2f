#include "icsmon/sflow.hpp"

#include <cstdio>

namespace icsmon {

namespace {

constexpr uint32_t sflow_version = 5;
constexpr uint32_t fmt_flow_sample = 1;
constexpr uint32_t fmt_counter_sample = 2;
constexpr uint32_t fmt_flow_sample_expanded = 3;
constexpr uint32_t fmt_counter_sample_expanded = 4;
constexpr uint32_t fmt_raw_packet_header = 1;
constexpr uint32_t header_proto_ethernet = 1;

class reader {
 public:
  reader(const uint8_t* data, size_t len) : data_(data), len_(len) {}

  bool u32(uint32_t& out) {
    if (pos_ + 4 > len_)
      return false;
    out = static_cast<uint32_t>(data_[pos_]) << 24 |
          static_cast<uint32_t>(data_[pos_ + 1]) << 16 |
          static_cast<uint32_t>(data_[pos_ + 2]) << 8 |
          static_cast<uint32_t>(data_[pos_ + 3]);
    pos_ += 4;
    return true;
  }

  bool bytes(std::vector<uint8_t>& out, size_t n) {
    if (pos_ + n > len_)
      return false;
    out.assign(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return true;
  }

  bool skip(size_t n) {
    if (pos_ + n > len_)
      return false;
    pos_ += n;
    return true;
  }

  size_t pos() const { return pos_; }
  const uint8_t* at() const { return data_ + pos_; }
  size_t remaining() const { return len_ - pos_; }

 private:
  const uint8_t* data_;
  size_t len_;
  size_t pos_ = 0;
};

size_t pad4(size_t n) { return (n + 3) & ~size_t{3}; }

// Parses the record list shared by both flow sample formats.
bool parse_records(reader& r, uint32_t sample_rate, uint32_t sample_pool,
                   std::vector<sflow_record>& out, ingest_stats& stats) {
  uint32_t n_records = 0;
  if (!r.u32(n_records))
    return false;
  bool any = false;
  for (uint32_t i = 0; i < n_records; ++i) {
    uint32_t rec_type = 0, rec_len = 0;
    if (!r.u32(rec_type) || !r.u32(rec_len) || r.remaining() < rec_len)
      return false;
    reader rec(r.at(), rec_len);
    r.skip(rec_len);
    uint32_t enterprise = rec_type >> 12;
    uint32_t format = rec_type & 0xfff;
    if (enterprise != 0 || format != fmt_raw_packet_header) {
      ++stats.records_skipped;
      continue;
    }
    uint32_t header_proto = 0, frame_len = 0, stripped = 0, header_len = 0;
    if (!rec.u32(header_proto) || !rec.u32(frame_len) || !rec.u32(stripped) ||
        !rec.u32(header_len))
      return false;
    if (header_proto != header_proto_ethernet) {
      ++stats.records_skipped;
      continue;
    }
    sflow_record sr;
    sr.sample_rate = sample_rate;
    sr.sample_pool = sample_pool;
    sr.frame_length = frame_len;
    if (!rec.bytes(sr.header, header_len))
      return false;
    out.push_back(std::move(sr));
    any = true;
  }
  return any;
}

void wr32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16 & 0xff));
  v.push_back(static_cast<uint8_t>(x >> 8 & 0xff));
  v.push_back(static_cast<uint8_t>(x & 0xff));
}

void patch32(std::vector<uint8_t>& v, size_t off, uint32_t x) {
  v[off] = static_cast<uint8_t>(x >> 24);
  v[off + 1] = static_cast<uint8_t>(x >> 16 & 0xff);
  v[off + 2] = static_cast<uint8_t>(x >> 8 & 0xff);
  v[off + 3] = static_cast<uint8_t>(x & 0xff);
}

} // namespace

std::vector<sflow_record> decode_sflow_datagram(const uint8_t* data, size_t len,
                                                ingest_stats& stats,
                                                std::string* agent_out) {
  std::vector<sflow_record> out;
  ++stats.datagrams;
  stats.bytes_read += len;
  reader r(data, len);

  uint32_t version = 0, addr_type = 0;
  if (!r.u32(version) || version != sflow_version || !r.u32(addr_type)) {
    ++stats.bad_datagrams;
    return out;
  }
  std::vector<uint8_t> agent;
  size_t agent_len = addr_type == 1 ? 4 : addr_type == 2 ? 16 : 0;
  if (agent_len == 0 || !r.bytes(agent, agent_len)) {
    ++stats.bad_datagrams;
    return out;
  }
  if (agent_out) {
    char buf[48];
    if (agent_len == 4) {
      std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", agent[0], agent[1],
                    agent[2], agent[3]);
      *agent_out = buf;
    } else {
      std::string hex;
      for (size_t i = 0; i < 16; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", agent[i]);
        hex += buf;
        if (i % 2 == 1 && i != 15)
          hex += ':';
      }
      *agent_out = hex;
    }
  }

  uint32_t sub_agent = 0, sequence = 0, uptime = 0, n_samples = 0;
  if (!r.u32(sub_agent) || !r.u32(sequence) || !r.u32(uptime) ||
      !r.u32(n_samples)) {
    ++stats.bad_datagrams;
    return out;
  }

  for (uint32_t i = 0; i < n_samples; ++i) {
    uint32_t sample_type = 0, sample_len = 0;
    if (!r.u32(sample_type) || !r.u32(sample_len) ||
        r.remaining() < sample_len) {
      ++stats.bad_datagrams;
      return out;
    }
    reader s(r.at(), sample_len);
    r.skip(sample_len);
    uint32_t enterprise = sample_type >> 12;
    uint32_t format = sample_type & 0xfff;
    if (enterprise != 0) {
      ++stats.samples_seen;
      ++stats.samples_rejected;
      continue;
    }
    if (format == fmt_counter_sample || format == fmt_counter_sample_expanded) {
      ++stats.counter_samples_skipped;
      continue;
    }
    if (format != fmt_flow_sample && format != fmt_flow_sample_expanded) {
      ++stats.samples_seen;
      ++stats.samples_rejected;
      continue;
    }

    ++stats.samples_seen;
    uint32_t seq = 0, rate = 0, pool = 0, drops = 0;
    bool header_ok = s.u32(seq);
    if (format == fmt_flow_sample) {
      uint32_t source_id = 0, in_if = 0, out_if = 0;
      header_ok = header_ok && s.u32(source_id) && s.u32(rate) && s.u32(pool) &&
                  s.u32(drops) && s.u32(in_if) && s.u32(out_if);
    } else {
      uint32_t sid_type = 0, sid_index = 0, in_fmt = 0, in_val = 0,
               out_fmt = 0, out_val = 0;
      header_ok = header_ok && s.u32(sid_type) && s.u32(sid_index) &&
                  s.u32(rate) && s.u32(pool) && s.u32(drops) && s.u32(in_fmt) &&
                  s.u32(in_val) && s.u32(out_fmt) && s.u32(out_val);
    }
    if (header_ok && rate > 0 &&
        parse_records(s, rate, pool, out, stats)) {
      ++stats.samples_decoded;
    } else {
      ++stats.samples_rejected;
    }
  }
  return out;
}

std::vector<uint8_t> encode_sflow_datagram(uint32_t agent_ipv4,
                                           uint32_t sub_agent,
                                           uint32_t sequence, uint32_t uptime_ms,
                                           const std::vector<sflow_sample_spec>& samples) {
  std::vector<uint8_t> out;
  wr32(out, sflow_version);
  wr32(out, 1); // agent address type IPv4
  wr32(out, agent_ipv4);
  wr32(out, sub_agent);
  wr32(out, sequence);
  wr32(out, uptime_ms);
  wr32(out, static_cast<uint32_t>(samples.size()));

  for (const auto& s : samples) {
    wr32(out, s.expanded ? fmt_flow_sample_expanded : fmt_flow_sample);
    size_t len_at = out.size();
    wr32(out, 0); // patched below
    size_t start = out.size();

    wr32(out, s.sequence);
    if (s.expanded) {
      wr32(out, 0); // source id type
      wr32(out, s.source_index);
    } else {
      wr32(out, s.source_index);
    }
    wr32(out, s.sample_rate);
    wr32(out, s.sample_pool);
    wr32(out, s.drops);
    if (s.expanded) {
      wr32(out, 0); // input format
      wr32(out, 1); // input value
      wr32(out, 0); // output format
      wr32(out, 2); // output value
    } else {
      wr32(out, 1); // input if
      wr32(out, 2); // output if
    }
    wr32(out, 1); // record count

    wr32(out, fmt_raw_packet_header);
    size_t padded = pad4(s.header.size());
    wr32(out, static_cast<uint32_t>(16 + padded));
    wr32(out, header_proto_ethernet);
    uint32_t frame_len = s.frame_length
                             ? s.frame_length
                             : static_cast<uint32_t>(s.header.size());
    wr32(out, frame_len);
    wr32(out, 0); // stripped
    wr32(out, static_cast<uint32_t>(s.header.size()));
    out.insert(out.end(), s.header.begin(), s.header.end());
    out.resize(out.size() + (padded - s.header.size()), 0);

    patch32(out, len_at, static_cast<uint32_t>(out.size() - start));
  }
  return out;
}

} // namespace icsmon
