#include "icsmon/dissect.hpp"

#include <algorithm>
#include <stdexcept>

namespace icsmon {

namespace {

using dr = dissect_result;

constexpr dr WF = dr::well_formed;
constexpr dr MF = dr::malformed;
constexpr dr ID = dr::insufficient_data;
constexpr dr NA = dr::not_applicable;

uint16_t be16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

uint32_t be32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
         static_cast<uint32_t>(p[2]) << 8 | p[3];
}

uint16_t le16(const uint8_t* p) {
  return static_cast<uint16_t>(p[1] << 8 | p[0]);
}

uint32_t le32(const uint8_t* p) {
  return static_cast<uint32_t>(p[3]) << 24 | static_cast<uint32_t>(p[2]) << 16 |
         static_cast<uint32_t>(p[1]) << 8 | p[0];
}

// ---- Modbus/TCP ------------------------------------------------------------
// MBAP: tid(2) pid(2) len(2) unit(1), then the PDU starting with the function
// code. len counts unit id + PDU.
dr d_modbus(const uint8_t* p, size_t n) {
  if (n < 7)
    return ID;
  if (be16(p + 2) != 0)
    return MF; // protocol id nonzero
  uint16_t len = be16(p + 4);
  if (len < 2 || len > 254)
    return MF;
  if (n >= 8) {
    uint8_t func = p[7];
    if ((func & 0x7f) == 0)
      return MF;
  }
  if (n > 6u + len)
    return MF;
  return WF;
}

// ---- MQTT ------------------------------------------------------------------
// Fixed header: packet type/flags byte plus remaining-length varint.
dr d_mqtt(const uint8_t* p, size_t n) {
  if (n < 2)
    return ID;
  uint8_t type = p[0] >> 4;
  uint8_t flags = p[0] & 0x0f;
  if (type == 0 || type == 15)
    return MF;
  // Required fixed-header flags per packet type; -1 = any (PUBLISH).
  static constexpr int required[15] = {0, 0,  0, -1, 0, 0, 2, 0,
                                       2, 0, 2, 0,  0, 0, 0};
  int want = required[type];
  if (want >= 0 && flags != want)
    return MF;
  uint32_t rem = 0;
  size_t i = 1;
  int shift = 0;
  for (;;) {
    if (i >= n)
      return ID; // capture ends inside the varint
    uint8_t b = p[i++];
    rem |= static_cast<uint32_t>(b & 0x7f) << shift;
    if (!(b & 0x80))
      break;
    shift += 7;
    if (shift > 21)
      return MF; // varint longer than four bytes
  }
  size_t avail = n - i;
  if (avail > rem)
    return MF; // bytes past the declared remaining length
  const uint8_t* v = p + i;
  if (type == 1) { // CONNECT: protocol name + level
    if (avail >= 2) {
      uint16_t nl = be16(v);
      if (nl != 4 && nl != 6)
        return MF;
      if (avail >= 2u + nl) {
        static const char mqtt4[] = "MQTT";
        static const char mqtt3[] = "MQIsdp";
        const char* want_name = nl == 4 ? mqtt4 : mqtt3;
        if (!std::equal(v + 2, v + 2 + nl, want_name))
          return MF;
        if (avail >= 3u + nl) {
          uint8_t level = v[2 + nl];
          if (nl == 4 ? (level != 4 && level != 5) : level != 3)
            return MF;
        }
      }
    }
  } else if (type == 3) { // PUBLISH: qos and topic must fit
    uint8_t qos = (flags >> 1) & 3;
    if (qos == 3)
      return MF;
    if (avail >= 2) {
      uint16_t tl = be16(v);
      uint32_t need = 2u + tl + (qos ? 2u : 0u);
      if (need > rem)
        return MF;
    }
  }
  return WF;
}

// ---- CoAP ------------------------------------------------------------------
// RFC 7252 framing on both transports; the datagram is the PDU, so there is
// no trailing-bytes case (everything after the 0xFF marker is payload).
dr d_coap(const uint8_t* p, size_t n) {
  if (n < 4)
    return ID;
  if (p[0] >> 6 != 1)
    return MF; // version bits
  uint8_t tkl = p[0] & 0x0f;
  if (tkl > 8)
    return MF;
  uint8_t cls = p[1] >> 5;
  if (cls == 1 || cls == 6 || cls == 7)
    return MF; // reserved code classes
  size_t idx = 4u + tkl;
  if (idx >= n)
    return WF; // token (or more) beyond the capture
  while (idx < n) {
    uint8_t b = p[idx];
    if (b == 0xff)
      return idx + 1 < n ? WF : MF; // marker requires non-empty payload
    uint8_t delta = b >> 4;
    uint8_t olen = b & 0x0f;
    if (delta == 15 || olen == 15)
      return MF; // reserved nibble outside the payload marker
    ++idx;
    size_t ext = (delta == 13 ? 1 : delta == 14 ? 2 : 0) +
                 (olen == 13 ? 1 : olen == 14 ? 2 : 0);
    if (idx + ext > n)
      return WF; // extended option header truncated
    size_t value_len = olen;
    size_t di = delta == 13 ? 1 : delta == 14 ? 2 : 0;
    if (olen == 13)
      value_len = 13u + p[idx + di];
    else if (olen == 14)
      value_len = 269u + be16(p + idx + di);
    idx += ext;
    if (idx + value_len > n)
      return WF; // option value truncated
    idx += value_len;
  }
  return WF;
}

// ---- BACnet/IP -------------------------------------------------------------
dr d_bacnet(const uint8_t* p, size_t n) {
  if (n < 4)
    return ID;
  if (p[0] != 0x81)
    return MF;
  uint8_t func = p[1];
  if (func > 0x0c)
    return MF;
  uint16_t blen = be16(p + 2);
  if (blen < 4)
    return MF;
  if (n > blen)
    return MF;
  size_t npdu = 0;
  if (func == 0x0a || func == 0x0b)
    npdu = 4;
  else if (func == 0x04)
    npdu = 10; // forwarded-NPDU carries a 6-byte origin first
  if (npdu && npdu < n && p[npdu] != 0x01)
    return MF; // NPDU version
  return WF;
}

// ---- DNP3 ------------------------------------------------------------------
dr d_dnp3(const uint8_t* p, size_t n) {
  if (n < 10)
    return ID;
  if (p[0] != 0x05 || p[1] != 0x64)
    return MF;
  uint8_t len = p[2];
  if (len < 5)
    return MF;
  if (crc16_dnp(p, 8) != le16(p + 8))
    return MF;
  size_t user = len - 5u;
  size_t blocks = (user + 15) / 16;
  size_t total = 10 + user + 2 * blocks;
  if (n > total)
    return MF;
  size_t off = 10;
  size_t remaining = user;
  while (remaining > 0) {
    size_t blk = std::min<size_t>(16, remaining);
    if (off + blk + 2 > n)
      break; // block truncated by the capture
    if (crc16_dnp(p + off, blk) != le16(p + off + blk))
      return MF;
    off += blk + 2;
    remaining -= blk;
  }
  return WF;
}

// ---- Ethernet/IP -----------------------------------------------------------
dr d_enip(const uint8_t* p, size_t n, uint16_t port) {
  if (port == 2222) { // implicit I/O: bare common packet format
    if (n < 2)
      return ID;
    uint16_t count = le16(p);
    if (count == 0 || count > 8)
      return MF;
    size_t off = 2;
    for (uint16_t i = 0; i < count; ++i) {
      if (off + 4 > n)
        return WF; // item header beyond the capture
      uint16_t type = le16(p + off);
      switch (type) {
      case 0x0000:
      case 0x00a1:
      case 0x00b1:
      case 0x00b2:
      case 0x8000:
      case 0x8001:
      case 0x8002:
        break;
      default:
        return MF;
      }
      uint16_t ilen = le16(p + off + 2);
      off += 4;
      if (off + ilen > n)
        return WF;
      off += ilen;
    }
    return off == n ? WF : MF;
  }
  if (n < 24)
    return ID;
  uint16_t cmd = le16(p);
  switch (cmd) {
  case 0x0000:
  case 0x0004:
  case 0x0063:
  case 0x0064:
  case 0x0065:
  case 0x0066:
  case 0x006f:
  case 0x0070:
    break;
  default:
    return MF;
  }
  if (le32(p + 20) != 0)
    return MF; // options must be zero
  uint16_t elen = le16(p + 2);
  if (n > 24u + elen)
    return MF;
  return WF;
}

// ---- IEC 60870-5-104 -------------------------------------------------------
dr d_iec104(const uint8_t* p, size_t n) {
  if (n < 6)
    return ID;
  if (p[0] != 0x68)
    return MF;
  uint8_t len = p[1];
  if (len < 4 || len > 253)
    return MF;
  if (n > 2u + len)
    return MF;
  uint8_t c1 = p[2], c2 = p[3], c3 = p[4], c4 = p[5];
  if ((c1 & 1) == 0) { // I format
    if (len < 6)
      return MF; // must carry an ASDU
    if (n >= 7 && p[6] == 0)
      return MF; // ASDU type 0 is reserved
  } else if ((c1 & 3) == 1) { // S format
    if (c1 != 0x01 || c2 != 0 || len != 4)
      return MF;
  } else { // U format
    switch (c1) {
    case 0x07:
    case 0x0b:
    case 0x13:
    case 0x23:
    case 0x43:
    case 0x83:
      break;
    default:
      return MF;
    }
    if (c2 || c3 || c4 || len != 4)
      return MF;
  }
  return WF;
}

// ---- ISO on TCP (port 102 family) ------------------------------------------
// ICCP and IEC 61850 ride MMS over the OSI session/presentation stack;
// S7comm puts its own header directly after COTP. Connection-phase COTP is
// indistinguishable, so CR/CC/DR/DC pass for every flavor. Once data flows,
// the first upper-layer byte picks the owner and the other flavors report
// NotApplicable.
enum class iso_flavor { mms, s7 };

dr d_iso_tcp(const uint8_t* p, size_t n, iso_flavor flavor) {
  if (n < 6)
    return ID;
  if (p[0] != 0x03 || p[1] != 0x00)
    return MF;
  uint16_t tlen = be16(p + 2);
  if (tlen < 7)
    return MF;
  if (n > tlen)
    return MF;
  uint8_t li = p[4];
  uint8_t code = p[5] & 0xf0;
  if (code == 0xe0 || code == 0xd0 || code == 0x80 || code == 0xc0)
    return WF; // connection phase
  if (code != 0xf0)
    return MF;
  if (li != 2)
    return MF;
  if (n <= 7)
    return WF; // nothing above COTP captured yet
  uint8_t u = p[7];
  if (u == 0x32) { // S7comm protocol id
    if (flavor != iso_flavor::s7)
      return NA;
    size_t avail = n - 7;
    if (avail >= 2) {
      uint8_t rosctr = p[8];
      if (rosctr != 1 && rosctr != 2 && rosctr != 3 && rosctr != 7)
        return MF;
      size_t hdr = (rosctr == 2 || rosctr == 3) ? 12 : 10;
      if (avail >= 10) {
        uint16_t parlen = be16(p + 13);
        uint16_t datalen = be16(p + 15);
        if (7u + hdr + parlen + datalen != tlen)
          return MF;
      }
    }
    return WF;
  }
  if (u == 0x0d || u == 0x0e || u == 0x01) { // session SPDU
    if (flavor != iso_flavor::mms)
      return NA;
    if (n >= 9) {
      uint8_t sli = p[8];
      if (u == 0x01) {
        if (sli != 0)
          return MF; // GIVE TOKENS carries no parameters
        if (n >= 11 && (p[9] != 0x01 || p[10] != 0x00))
          return MF; // DATA TRANSFER SPDU must follow
      } else if (9u + sli > tlen) {
        return MF;
      }
    }
    return WF;
  }
  return MF;
}

// ---- OPC UA ----------------------------------------------------------------
dr d_opcua(const uint8_t* p, size_t n) {
  if (n < 8)
    return ID;
  char t0 = static_cast<char>(p[0]);
  char t1 = static_cast<char>(p[1]);
  char t2 = static_cast<char>(p[2]);
  bool final_only = true;
  if ((t0 == 'H' && t1 == 'E' && t2 == 'L') ||
      (t0 == 'A' && t1 == 'C' && t2 == 'K') ||
      (t0 == 'E' && t1 == 'R' && t2 == 'R') ||
      (t0 == 'R' && t1 == 'H' && t2 == 'E')) {
    final_only = true;
  } else if ((t0 == 'M' && t1 == 'S' && t2 == 'G') ||
             (t0 == 'O' && t1 == 'P' && t2 == 'N') ||
             (t0 == 'C' && t1 == 'L' && t2 == 'O')) {
    final_only = false;
  } else {
    return MF;
  }
  char chunk = static_cast<char>(p[3]);
  if (chunk != 'F' && (final_only || (chunk != 'C' && chunk != 'A')))
    return MF;
  uint32_t size = le32(p + 4);
  if (size < 8 || size > (1u << 24))
    return MF;
  if (n > size)
    return MF;
  if (t0 == 'H' && n >= 12 && le32(p + 8) > 10)
    return MF; // protocol version
  return WF;
}

// ---- HART-IP ---------------------------------------------------------------
dr d_hart_ip(const uint8_t* p, size_t n) {
  if (n < 8)
    return ID;
  if (p[0] != 1)
    return MF; // version
  uint8_t type = p[1];
  if (type > 2 && type != 15)
    return MF; // request/response/publish/NAK
  uint8_t id = p[2];
  if (id > 3)
    return MF;
  uint16_t count = be16(p + 6);
  if (count < 8)
    return MF; // byte count includes the header
  if (n > count)
    return MF;
  if (type == 0 && id == 0 && n >= 9 && p[8] > 1)
    return MF; // session initiate host type
  return WF;
}

// ---- OMRON FINS ------------------------------------------------------------
dr fins_frame(const uint8_t* p, size_t n) {
  if ((p[0] & 0x80) == 0 || (p[0] & 0x3e) != 0)
    return MF; // ICF reserved bits
  if (p[1] != 0)
    return MF; // RSV
  if (p[2] > 7)
    return MF; // GCT
  if (p[3] > 0x7f || p[6] > 0x7f)
    return MF; // DNA / SNA
  uint8_t mrc = p[10];
  bool known = (mrc >= 0x01 && mrc <= 0x09) || mrc == 0x0c || mrc == 0x21 ||
               mrc == 0x22 || mrc == 0x23 || mrc == 0x26 || mrc == 0x28;
  (void)n;
  return known ? WF : MF;
}

dr d_fins(const uint8_t* p, size_t n, transport tr) {
  if (tr == transport::tcp) {
    if (n < 8)
      return ID;
    if (p[0] != 'F' || p[1] != 'I' || p[2] != 'N' || p[3] != 'S')
      return MF;
    uint32_t len = be32(p + 4);
    if (len < 4)
      return MF;
    if (n > 8u + len)
      return MF;
    if (n >= 12) {
      uint32_t cmd = be32(p + 8);
      if (cmd > 8)
        return MF;
      if (cmd == 2 && n >= 16 + 12)
        return fins_frame(p + 16, n - 16);
    }
    return WF;
  }
  if (n < 12)
    return ID;
  return fins_frame(p, n);
}

// ---- PROFINET --------------------------------------------------------------
dr d_profinet(const uint8_t* p, size_t n) {
  if (n < 2)
    return ID;
  uint16_t fid = be16(p);
  bool rt = (fid >= 0x0080 && fid <= 0x00ff) ||
            (fid >= 0x8000 && fid <= 0xfbff) || fid == 0xfc01 || fid == 0xfe01;
  bool dcp = fid >= 0xfefc && fid <= 0xfeff;
  if (!rt && !dcp)
    return MF;
  if (dcp) {
    if (n >= 3 && (p[2] < 3 || p[2] > 6))
      return MF; // service id
    if (n >= 4 && p[3] != 0 && p[3] != 1 && p[3] != 5)
      return MF; // service type
    if (n >= 12) {
      uint16_t dculen = be16(p + 10);
      if (n > 12u + dculen)
        return MF;
    }
  }
  return WF;
}

// ---- EtherCAT --------------------------------------------------------------
dr d_ethercat(const uint8_t* p, size_t n) {
  if (n < 2)
    return ID;
  uint16_t h = le16(p);
  uint16_t elen = h & 0x07ff;
  if ((h >> 11) & 1)
    return MF; // reserved bit
  if (h >> 12 != 1)
    return MF; // type: EtherCAT command
  if (elen < 12)
    return MF; // one datagram header plus working counter
  if (n > 2u + elen)
    return MF;
  if (n >= 3 && p[2] > 14)
    return MF; // datagram command
  if (n >= 12) {
    uint16_t dlen = le16(p + 8) & 0x07ff;
    if (12u + dlen > elen)
      return MF;
  }
  return WF;
}

// ---- Foundation Fieldbus HSE -----------------------------------------------
dr d_ff_hse(const uint8_t* p, size_t n) {
  if (n < 12)
    return ID;
  if (p[0] != 1)
    return MF; // FDA session header version
  if (p[1] & 0xf0)
    return MF; // options high nibble reserved
  uint8_t proto = p[2] >> 4;
  if (proto < 1 || proto > 4)
    return MF;
  uint8_t mtype = p[3] >> 4;
  if (mtype < 1 || mtype > 6)
    return MF;
  uint32_t mlen = be32(p + 8);
  if (mlen > (1u << 20))
    return MF;
  if (n > 12u + mlen)
    return MF;
  return WF;
}

// ---- ANSI C12.22 -----------------------------------------------------------
dr d_c1222(const uint8_t* p, size_t n) {
  if (n < 2)
    return ID;
  if (p[0] != 0x60)
    return MF; // ACSE PDU tag
  size_t hdr;
  size_t blen;
  if (p[1] < 0x80) {
    blen = p[1];
    hdr = 2;
  } else {
    size_t k = p[1] & 0x7f;
    if (k == 0 || k > 4)
      return MF;
    if (n < 2 + k)
      return ID; // capture ends inside the length field
    blen = 0;
    for (size_t i = 0; i < k; ++i)
      blen = blen << 8 | p[2 + i];
    hdr = 2 + k;
  }
  if (blen == 0)
    return MF;
  if (n > hdr + blen)
    return MF;
  if (n > hdr && (p[hdr] & 0xc0) != 0x80)
    return MF; // first element must be context class
  return WF;
}

// ---- ATG (Veeder-Root serial-over-TCP) ---------------------------------------
dr d_atg(const uint8_t* p, size_t n) {
  size_t off = 0;
  if (n >= 1 && p[0] == 0x01)
    off = 1; // optional SOH
  if (n - off < 6)
    return ID;
  uint8_t c = p[off];
  if (c != 'I' && c != 'i' && c != 'S' && c != 's')
    return MF;
  for (size_t i = off + 1; i < off + 6; ++i)
    if (p[i] < '0' || p[i] > '9')
      return MF;
  // A report must carry content beyond the echoed function tag; the bare
  // tag (with at most line endings) is a poll, the scan-probe shape.
  bool content = false;
  for (size_t i = off + 6; i < n; ++i) {
    uint8_t b = p[i];
    if (b == 0x03)
      return i + 1 == n && content ? WF : MF; // ETX only as terminator
    if (b == 0x0d || b == 0x0a)
      continue;
    if (b < 0x20 || b > 0x7e)
      return MF;
    content = true;
  }
  return content ? WF : MF;
}

// ---- Zigbee IP (gateway framing) ---------------------------------------------
dr d_zigbee_ip(const uint8_t* p, size_t n) {
  if (n < 4)
    return ID;
  if (p[0] != 1)
    return MF; // version
  if (p[1] < 1 || p[1] > 4)
    return MF; // message type
  uint16_t blen = be16(p + 2);
  if (n > 4u + blen)
    return MF;
  return WF;
}

// ---- AMQP ------------------------------------------------------------------
dr d_amqp(const uint8_t* p, size_t n) {
  if (n < 8)
    return ID;
  if (p[0] == 'A' && p[1] == 'M' && p[2] == 'Q' && p[3] == 'P') {
    if (n > 8)
      return MF; // protocol header is exactly eight bytes
    bool v091 = p[4] == 0 && p[5] == 0 && p[6] == 9 && p[7] == 1;
    bool v10 = p[4] <= 3 && p[5] == 1 && p[6] == 0 && p[7] == 0;
    return (v091 || v10) ? WF : MF;
  }
  if (p[0] == 0) { // AMQP 1.0 frame
    uint32_t size = be32(p);
    if (size < 8)
      return MF;
    if (p[4] < 2)
      return MF; // doff
    if (p[5] > 1)
      return MF; // frame type
    if (n > size)
      return MF;
    return WF;
  }
  if (p[0] == 1 || p[0] == 2 || p[0] == 3 || p[0] == 8) { // 0-9-1 frame
    uint32_t size = be32(p + 3);
    if (size > (1u << 24))
      return MF;
    size_t total = 7u + size + 1u;
    if (n > total)
      return MF;
    if (n == total && p[n - 1] != 0xce)
      return MF; // frame-end octet
    return WF;
  }
  return MF;
}

} // namespace

std::string_view to_string(dissect_result r) {
  switch (r) {
  case dr::well_formed:
    return "well-formed";
  case dr::malformed:
    return "malformed";
  case dr::insufficient_data:
    return "insufficient-data";
  case dr::not_applicable:
    return "not-applicable";
  }
  return "?";
}

uint16_t crc16_dnp(const uint8_t* data, size_t len) {
  uint16_t crc = 0;
  for (size_t i = 0; i < len; ++i) {
    crc = static_cast<uint16_t>(crc ^ data[i]);
    for (int b = 0; b < 8; ++b)
      crc = (crc & 1) ? static_cast<uint16_t>((crc >> 1) ^ 0xa6bc)
                      : static_cast<uint16_t>(crc >> 1);
  }
  return static_cast<uint16_t>(~crc);
}

dissect_result dissect(protocol_id proto, const std::vector<uint8_t>& payload,
                       transport tr, uint16_t port) {
  const uint8_t* p = payload.data();
  size_t n = payload.size();
  switch (proto) {
  case protocol_id::modbus_tcp:
    return d_modbus(p, n);
  case protocol_id::mqtt:
    return d_mqtt(p, n);
  case protocol_id::coap:
    return d_coap(p, n);
  case protocol_id::bacnet_ip:
    return d_bacnet(p, n);
  case protocol_id::dnp3:
    return d_dnp3(p, n);
  case protocol_id::ethernet_ip:
    return d_enip(p, n, port);
  case protocol_id::iec104:
    return d_iec104(p, n);
  case protocol_id::iccp:
  case protocol_id::iec61850:
    return d_iso_tcp(p, n, iso_flavor::mms);
  case protocol_id::s7comm:
    return d_iso_tcp(p, n, iso_flavor::s7);
  case protocol_id::opc_ua:
    return d_opcua(p, n);
  case protocol_id::hart_ip:
    return d_hart_ip(p, n);
  case protocol_id::omron_fins:
    return d_fins(p, n, tr);
  case protocol_id::profinet:
    return d_profinet(p, n);
  case protocol_id::ethercat:
    return d_ethercat(p, n);
  case protocol_id::ff_hse:
    return d_ff_hse(p, n);
  case protocol_id::ansi_c1222:
    return d_c1222(p, n);
  case protocol_id::atg:
    return d_atg(p, n);
  case protocol_id::zigbee_ip:
    return d_zigbee_ip(p, n);
  case protocol_id::amqp:
    return d_amqp(p, n);
  default:
    throw std::invalid_argument("no dissector for " +
                                std::string(protocol_name(proto)));
  }
}

std::vector<dissection> dissect_packet(const sampled_packet& pkt,
                                       const protocol_registry& reg) {
  std::vector<dissection> out;
  auto consider = [&](uint16_t port) {
    for (protocol_id proto : reg.lookup(port, pkt.tr)) {
      bool seen = false;
      for (const auto& d : out)
        if (d.proto == proto) {
          seen = true;
          break;
        }
      if (seen)
        continue;
      dissection d;
      d.proto = proto;
      d.port = port;
      if (reg.entry(proto).tier == dissector_tier::full)
        d.result = dissect(proto, pkt.payload, pkt.tr, port);
      out.push_back(d);
    }
  };
  consider(pkt.dst_port);
  consider(pkt.src_port);
  return out;
}

bool any_well_formed(const std::vector<dissection>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const dissection& d) {
    return d.result == dissect_result::well_formed;
  });
}

} // namespace icsmon
