// Regenerates the golden dissection fixtures under tests/fixtures/golden:
// one pcap per protocol plus a manifest with file digests.  The payloads and
// expected outcomes live in tests/golden_corpus.cpp; rerunning this tool must
// reproduce the checked-in files byte for byte.

#include <cstdio>
#include <map>
#include <string>

#include <json.hpp>

#include "../tests/golden_corpus.hpp"
#include "icsmon/digest.hpp"
#include "icsmon/frame.hpp"
#include "icsmon/pcapio.hpp"

namespace {

constexpr uint32_t kSrcIp = 0xC000020A; // 192.0.2.10
constexpr uint32_t kDstIp = 0xC6336414; // 198.51.100.20
constexpr int64_t kEpoch = 1578960000;

}  // namespace

int main(int argc, char** argv) {
  using namespace icsmon;
  if (argc != 2) {
    std::fprintf(stderr, "usage: golden_gen <output-dir>\n");
    return 2;
  }
  const std::string dir = argv[1];

  nlohmann::json files = nlohmann::json::object();
  size_t index = 0;
  for (protocol_id proto : golden::covered_protocols()) {
    const std::string name = golden::slug(proto) + ".pcap";
    const std::string path = dir + "/" + name;
    pcap_writer w;
    if (!w.open(path)) {
      std::fprintf(stderr, "golden_gen: cannot write %s\n", path.c_str());
      return 1;
    }
    for (const golden::fixture* f : golden::fixtures_for(proto)) {
      uint16_t sport = static_cast<uint16_t>(49152 + index % 16384);
      std::vector<uint8_t> frame =
          f->tr == transport::tcp
              ? build_tcp_frame(kSrcIp, sport, kDstIp, f->port,
                                tcpflag::psh | tcpflag::ack, f->payload)
              : build_udp_frame(kSrcIp, sport, kDstIp, f->port, f->payload);
      w.write(kEpoch + static_cast<int64_t>(index), 0, frame);
      ++index;
    }
    size_t packets = w.packets_written();
    w.close();
    files[name] = {{"sha256", sha256_file(path)},
                   {"packets", packets}};
  }

  nlohmann::json manifest = {{"fixture_count", index}, {"files", files}};
  const std::string mpath = dir + "/manifest.json";
  FILE* fp = std::fopen(mpath.c_str(), "wb");
  if (!fp) {
    std::fprintf(stderr, "golden_gen: cannot write %s\n", mpath.c_str());
    return 1;
  }
  const std::string text = manifest.dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), fp);
  std::fclose(fp);
  std::printf("golden_gen: %zu fixtures across %zu pcaps -> %s\n", index,
              files.size(), dir.c_str());
  return 0;
}
