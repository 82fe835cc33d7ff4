// Copyright 2026 The xrtg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xrtg/ingest.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include "byte_io.hpp"
#include "xrtg/error.hpp"

namespace xrtg {
namespace {

using detail::load_be16;
using detail::load_be32;

constexpr std::uint32_t bswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

constexpr std::uint32_t kMagicMicros = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNanos = 0xA1B23C4D;
constexpr std::uint32_t kMagicPcapng = 0x0A0D0D0A;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
constexpr std::uint32_t kMaxRecordSize = 256u << 20;

enum LinkType : std::uint32_t {
  kLinkNull = 0,
  kLinkEthernet = 1,
  kLinkRaw = 101,
  kLinkLoop = 108,
  kLinkLinuxSll = 113,
  kLinkIpv4 = 228,
  kLinkIpv6 = 229,
  kLinkLinuxSll2 = 276,
};

bool supported_link(std::uint32_t link) {
  switch (link) {
    case kLinkNull:
    case kLinkEthernet:
    case kLinkRaw:
    case 12:  // raw IP on some BSDs
    case 14:
    case kLinkLoop:
    case kLinkLinuxSll:
    case kLinkIpv4:
    case kLinkIpv6:
    case kLinkLinuxSll2:
      return true;
    default:
      return false;
  }
}

struct UdpView {
  std::uint16_t src_port;
  std::uint16_t dst_port;
  std::uint32_t payload_size;
  std::span<const std::byte> payload;  // captured part only
};

// Offset of the IP header inside a link-layer frame, or npos when the frame
// does not carry IP.
std::size_t ip_offset(std::uint32_t link, std::span<const std::byte> frame) {
  constexpr auto npos = std::size_t(-1);
  auto is_ip_ethertype = [](std::uint16_t t) { return t == 0x0800 || t == 0x86DD; };
  switch (link) {
    case kLinkEthernet: {
      std::size_t off = 12;
      while (off + 2 <= frame.size()) {
        const std::uint16_t type = load_be16(frame.data() + off);
        if (type == 0x8100 || type == 0x88A8) {
          off += 4;
          continue;
        }
        return is_ip_ethertype(type) ? off + 2 : npos;
      }
      return npos;
    }
    case kLinkLinuxSll:
      if (frame.size() < 16) return npos;
      return is_ip_ethertype(load_be16(frame.data() + 14)) ? 16 : npos;
    case kLinkLinuxSll2:
      if (frame.size() < 20) return npos;
      return is_ip_ethertype(load_be16(frame.data())) ? 20 : npos;
    case kLinkNull:
    case kLinkLoop:
      return frame.size() >= 4 ? 4 : npos;
    default:
      return 0;
  }
}

std::optional<UdpView> find_udp(std::span<const std::byte> ip) {
  if (ip.empty()) return std::nullopt;
  const unsigned version = std::to_integer<unsigned>(ip[0]) >> 4;
  std::size_t l4 = 0;
  unsigned proto = 0;
  if (version == 4) {
    if (ip.size() < 20) return std::nullopt;
    l4 = (std::to_integer<unsigned>(ip[0]) & 0x0F) * 4u;
    proto = std::to_integer<unsigned>(ip[9]);
    const std::uint16_t frag = load_be16(ip.data() + 6);
    if ((frag & 0x1FFF) != 0) return std::nullopt;  // non-first fragment
  } else if (version == 6) {
    if (ip.size() < 40) return std::nullopt;
    proto = std::to_integer<unsigned>(ip[6]);
    l4 = 40;
    // Hop-by-hop, routing and destination options headers.
    while ((proto == 0 || proto == 43 || proto == 60) && l4 + 8 <= ip.size()) {
      proto = std::to_integer<unsigned>(ip[l4]);
      l4 += (std::to_integer<std::size_t>(ip[l4 + 1]) + 1) * 8;
    }
  } else {
    return std::nullopt;
  }
  if (proto != 17 || l4 + 8 > ip.size()) return std::nullopt;
  const std::byte* udp = ip.data() + l4;
  const std::uint16_t length = load_be16(udp + 4);
  const std::size_t captured = ip.size() - l4 - 8;
  std::uint32_t payload = length >= 8 ? length - 8u : 0u;
  if (length == 0) payload = static_cast<std::uint32_t>(captured);  // jumbogram
  return UdpView{load_be16(udp), load_be16(udp + 2), payload,
                 ip.subspan(l4 + 8, std::min<std::size_t>(captured, payload))};
}

bool rtp_marker(std::span<const std::byte> payload) {
  if (payload.size() < 2) return false;
  const unsigned version = std::to_integer<unsigned>(payload[0]) >> 6;
  return version == 2 && (std::to_integer<unsigned>(payload[1]) & 0x80u) != 0;
}

struct HeaderReader {
  bool swapped;
  std::uint32_t u32(const std::byte* p) const {
    const std::uint32_t v = detail::load_le32(p);
    return swapped ? bswap32(v) : v;
  }
};

constexpr std::uint8_t kMetricsVersion = 1;
constexpr std::array<char, 16> kMetricsMagic{'X', 'R', 'T', 'G', 'M', 'E', 'T', 'R',
                                             'I', 'C', 'S', 0,   0,   0,   0,   kMetricsVersion};

}  // namespace

Micros from_seconds(double seconds) {
  return Micros(static_cast<Micros::rep>(std::llround(seconds * 1e6)));
}

std::string_view to_string(Direction direction) {
  return direction == Direction::kUplink ? "uplink" : "downlink";
}

Direction direction_from_string(std::string_view name) {
  if (name == "uplink" || name == "ul" || name == "UL") return Direction::kUplink;
  if (name == "downlink" || name == "dl" || name == "DL") return Direction::kDownlink;
  throw UsageError("unknown direction '" + std::string(name) + "' (valid: uplink, downlink)");
}

StreamTrace parse_pcap(std::span<const std::byte> bytes, std::uint16_t udp_port,
                       std::string source, Direction direction) {
  if (bytes.size() < 4) {
    throw ParseError("file too short for a pcap header", 0);
  }
  const std::uint32_t raw_magic = detail::load_le32(bytes.data());
  if (raw_magic == kMagicPcapng) {
    throw ParseError("PCAPNG captures are not supported; convert to classic pcap first", 0);
  }
  bool swapped = false;
  bool nanos = false;
  if (raw_magic == kMagicMicros || raw_magic == kMagicNanos) {
    nanos = raw_magic == kMagicNanos;
  } else if (bswap32(raw_magic) == kMagicMicros || bswap32(raw_magic) == kMagicNanos) {
    swapped = true;
    nanos = bswap32(raw_magic) == kMagicNanos;
  } else {
    throw ParseError("not a pcap file (bad magic number)", 0);
  }
  if (bytes.size() < kGlobalHeaderSize) {
    throw ParseError("truncated pcap global header", bytes.size());
  }
  const HeaderReader hdr{swapped};
  const std::uint32_t link = hdr.u32(bytes.data() + 20);
  if (!supported_link(link)) {
    throw ParseError("unsupported link type " + std::to_string(link), 20);
  }

  StreamTrace trace;
  trace.source = std::move(source);
  trace.direction = direction;
  std::size_t offset = kGlobalHeaderSize;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kRecordHeaderSize) {
      throw ParseError("truncated packet record header", offset);
    }
    const std::byte* rec = bytes.data() + offset;
    const std::uint32_t sec = hdr.u32(rec);
    const std::uint32_t frac = hdr.u32(rec + 4);
    const std::uint32_t incl = hdr.u32(rec + 8);
    if (incl > kMaxRecordSize) {
      throw ParseError("implausible captured length " + std::to_string(incl), offset + 8);
    }
    if (bytes.size() - offset - kRecordHeaderSize < incl) {
      throw ParseError("truncated packet record", offset);
    }
    const auto frame = bytes.subspan(offset + kRecordHeaderSize, incl);
    offset += kRecordHeaderSize + incl;

    const std::size_t ip = ip_offset(link, frame);
    if (ip == std::size_t(-1) || ip > frame.size()) continue;
    const auto udp = find_udp(frame.subspan(ip));
    if (!udp || (udp->src_port != udp_port && udp->dst_port != udp_port)) continue;
    if (udp->payload_size == 0) continue;

    const std::int64_t micros =
        std::int64_t(sec) * 1'000'000 + (nanos ? std::int64_t(frac) / 1000 : std::int64_t(frac));
    trace.packets.push_back(
        PacketRecord{Micros(micros), udp->payload_size, false, rtp_marker(udp->payload)});
  }
  if (trace.packets.empty()) {
    throw EmptyDataError("no UDP packets on port " + std::to_string(udp_port) + " in " +
                         trace.source);
  }
  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  return trace;
}

StreamTrace read_pcap(const std::filesystem::path& path, std::uint16_t udp_port,
                      Direction direction) {
  if (!std::filesystem::exists(path)) {
    throw ParseError("capture file '" + path.string() + "' does not exist", 0);
  }
  const auto bytes = detail::read_file(path);
  try {
    return parse_pcap(bytes, udp_port, path.string(), direction);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

StreamTrace mark_frames(const StreamTrace& trace, double gap_threshold) {
  if (!(gap_threshold > 0.0)) {
    throw DomainError("gap threshold must be > 0");
  }
  if (trace.packets.empty()) {
    throw EmptyDataError("cannot mark frames of an empty trace");
  }
  StreamTrace out = trace;
  auto& p = out.packets;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i].frame_start = i == 0 || p[i - 1].rtp_marker ||
                       to_seconds(p[i].timestamp - p[i - 1].timestamp) > gap_threshold;
  }
  return out;
}

FrameMetrics compute_metrics(const StreamTrace& trace) {
  const auto& p = trace.packets;
  if (p.empty()) {
    throw EmptyDataError("cannot compute metrics of an empty trace");
  }
  if (!p.front().frame_start) {
    throw DomainError("trace is not frame-marked (first packet must start a frame)");
  }
  std::vector<double> frames;
  std::vector<double> inter_frame;
  std::vector<double> inter_packet;
  Eigen::VectorXd packet_sizes(Eigen::Index(p.size()));
  Micros frame_start_time = p.front().timestamp;
  for (std::size_t i = 0; i < p.size(); ++i) {
    packet_sizes[Eigen::Index(i)] = p[i].payload_size;
    if (p[i].frame_start) {
      if (i > 0) {
        inter_frame.push_back(to_seconds(p[i].timestamp - frame_start_time));
      }
      frame_start_time = p[i].timestamp;
      frames.push_back(p[i].payload_size);
    } else {
      frames.back() += p[i].payload_size;
      inter_packet.push_back(to_seconds(p[i].timestamp - p[i - 1].timestamp));
    }
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
  };
  return {to_vec(frames), to_vec(inter_frame), to_vec(inter_packet), std::move(packet_sizes)};
}

ArrayStats array_stats(const Eigen::VectorXd& values) {
  if (values.size() == 0) {
    throw EmptyDataError("cannot summarize an empty array");
  }
  ArrayStats s;
  s.count = values.size();
  s.mean = values.mean();
  s.std_dev = std::sqrt((values.array() - s.mean).square().sum() / double(values.size()));
  Eigen::VectorXd sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = Eigen::Index(std::ceil(0.95 * double(sorted.size())));
  s.p95 = sorted[std::clamp<Eigen::Index>(rank, 1, sorted.size()) - 1];
  return s;
}

SummaryStats summarize(const FrameMetrics& metrics) {
  auto maybe = [](const Eigen::VectorXd& v) -> std::optional<ArrayStats> {
    if (v.size() == 0) return std::nullopt;
    return array_stats(v);
  };
  return {maybe(metrics.frame_sizes), maybe(metrics.inter_frame_intervals),
          maybe(metrics.inter_packet_intervals), maybe(metrics.packet_sizes)};
}

std::vector<std::byte> encode_metrics(const FrameMetrics& metrics) {
  std::vector<std::byte> out;
  for (char c : kMetricsMagic) out.push_back(static_cast<std::byte>(c));
  for (const Eigen::VectorXd* v : {&metrics.frame_sizes, &metrics.inter_frame_intervals,
                                   &metrics.inter_packet_intervals, &metrics.packet_sizes}) {
    detail::store_le(out, std::uint64_t(v->size()), 8);
    for (double x : *v) {
      detail::store_le(out, std::bit_cast<std::uint64_t>(x), 8);
    }
  }
  return out;
}

FrameMetrics decode_metrics(std::span<const std::byte> bytes) {
  if (bytes.size() < kMetricsMagic.size() ||
      std::memcmp(bytes.data(), kMetricsMagic.data(), kMetricsMagic.size() - 1) != 0) {
    throw FormatError("not an xrtg metrics file (bad magic)");
  }
  const auto version = std::to_integer<std::uint8_t>(bytes[kMetricsMagic.size() - 1]);
  if (version != kMetricsVersion) {
    throw FormatError("unsupported metrics format version " + std::to_string(version) +
                      " (expected " + std::to_string(kMetricsVersion) + ")");
  }
  std::size_t off = kMetricsMagic.size();
  auto read_array = [&](const char* name) {
    if (bytes.size() - off < 8) {
      throw FormatError(std::string("metrics file truncated before '") + name + "' length");
    }
    const std::uint64_t n = detail::load_le64(bytes.data() + off);
    off += 8;
    if (n > (bytes.size() - off) / 8) {
      throw FormatError(std::string("metrics file truncated inside '") + name + "'");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i, off += 8) {
      v[Eigen::Index(i)] = std::bit_cast<double>(detail::load_le64(bytes.data() + off));
    }
    return v;
  };
  FrameMetrics m;
  m.frame_sizes = read_array("frame_sizes");
  m.inter_frame_intervals = read_array("inter_frame");
  m.inter_packet_intervals = read_array("inter_packet");
  m.packet_sizes = read_array("packet_sizes");
  if (off != bytes.size()) {
    throw FormatError("trailing bytes after metrics arrays");
  }
  return m;
}

void export_metrics(const FrameMetrics& metrics, const std::filesystem::path& path) {
  detail::write_file(path, encode_metrics(metrics));
}

FrameMetrics import_metrics(const std::filesystem::path& path) {
  std::vector<std::byte> bytes;
  try {
    bytes = detail::read_file(path);
  } catch (const ParseError&) {
    throw FormatError("cannot open metrics file '" + path.string() + "'");
  }
  return decode_metrics(bytes);
}

}  // namespace xrtg
