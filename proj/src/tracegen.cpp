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

#include "xrtg/tracegen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "byte_io.hpp"
#include "xrtg/error.hpp"

namespace xrtg {
namespace {

constexpr int kMaxRejections = 1'000'000;

// Draws kept inside [floor, ceiling] by clamping or by rejection.
class BoundedDraw {
 public:
  BoundedDraw(const DistModel& model, double floor, double ceiling, FloorPolicy policy,
              const char* what)
      : sampler_(model), floor_(floor), ceiling_(ceiling), policy_(policy), what_(what) {}

  double operator()(Rng& rng) {
    double v = sampler_(rng);
    if (policy_ == FloorPolicy::kClamp) {
      return std::clamp(v, floor_, ceiling_);
    }
    for (int i = 0; v < floor_ || v > ceiling_; ++i) {
      if (i == kMaxRejections) {
        throw DegenerateModelError(std::string(what_) + " draws stayed outside [" +
                                   std::to_string(floor_) + ", " + std::to_string(ceiling_) +
                                   "] after 10^6 attempts");
      }
      v = sampler_(rng);
    }
    return v;
  }

 private:
  DistSampler sampler_;
  double floor_;
  double ceiling_;
  FloorPolicy policy_;
  const char* what_;
};

bool keep_going(const GenConfig& cfg, std::int64_t frames, double frame_time) {
  if (cfg.n_frames) return frames < *cfg.n_frames;
  return frame_time < *cfg.duration;
}

void finish(SyntheticTrace& trace, const GenConfig& cfg) {
  if (cfg.duration) {
    trace.duration = *cfg.duration;
  } else if (!trace.packets.empty()) {
    trace.duration = to_seconds(trace.packets.back().timestamp - trace.packets.front().timestamp);
  }
}

// Ethernet + IPv4 + UDP.
constexpr std::uint32_t kHeaderBytes = 14 + 20 + 8;

std::uint16_t ipv4_checksum(const std::vector<std::byte>& buf, std::size_t off) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < 20; i += 2) {
    sum += detail::load_be16(buf.data() + off + i);
  }
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

void validate(const GenConfig& cfg) {
  if (cfg.n_frames.has_value() == cfg.duration.has_value()) {
    throw UsageError("exactly one of frame count or duration must be given");
  }
  if (cfg.n_frames && *cfg.n_frames < 1) {
    throw UsageError("frame count must be >= 1");
  }
  if (cfg.duration && !(*cfg.duration > 0.0 && std::isfinite(*cfg.duration))) {
    throw UsageError("duration must be > 0");
  }
  if (!(cfg.frame_size_floor >= 1.0) || !(cfg.interval_floor >= 0.0)) {
    throw UsageError("floors must be >= 1 byte for sizes and >= 0 s for intervals");
  }
  if (!(cfg.inter_packet_ceiling > cfg.interval_floor)) {
    throw UsageError("inter-packet ceiling must exceed the interval floor");
  }
}

StreamTrace SyntheticTrace::as_stream_trace(Direction direction) const {
  return StreamTrace{packets, "synthetic:" + model_id, direction};
}

SyntheticTrace generate(const StreamModel& model, const GenConfig& cfg) {
  validate(model);
  validate(cfg);
  const std::uint32_t packet_bytes = packet_size_bytes(model, cfg.policy);
  if (packet_bytes == 0) {
    throw DomainError("IP packet size must be > 0");
  }
  Rng rng(cfg.seed);
  constexpr double kNoCeiling = std::numeric_limits<double>::infinity();
  BoundedDraw frame_size(model.frame_size_dist, cfg.frame_size_floor, kNoCeiling,
                         cfg.floor_policy, "frame size");
  BoundedDraw inter_packet(model.inter_packet_dist, cfg.interval_floor,
                           cfg.inter_packet_ceiling, cfg.floor_policy,
                           "inter-packet interval");
  BoundedDraw inter_frame(model.inter_frame_dist, cfg.interval_floor, kNoCeiling,
                          cfg.floor_policy, "inter-frame interval");

  SyntheticTrace trace;
  trace.model_id = model.stream_id;
  trace.seed = cfg.seed;
  trace.policy = to_string(cfg.policy.value_or(model.packet_size_policy));
  double frame_time = 0.0;
  while (keep_going(cfg, trace.frames, frame_time)) {
    const double size = frame_size(rng);
    const auto n_packets =
        std::max<std::int64_t>(1, std::llround(size / double(packet_bytes)));
    double t = frame_time;
    for (std::int64_t k = 0; k < n_packets; ++k) {
      if (k > 0) t += inter_packet(rng);
      trace.packets.push_back(
          PacketRecord{from_seconds(t), packet_bytes, k == 0, k == n_packets - 1});
    }
    const double gap = inter_frame(rng);
    frame_time = cfg.timing == FrameTiming::kStartToStart ? std::max(frame_time + gap, t)
                                                          : t + gap;
    ++trace.frames;
  }
  finish(trace, cfg);
  return trace;
}

NormStats norm_stats_for(const ModelBankEntry& entry) {
  const auto& r = entry.reference;
  return {r.frame_size.mean,  r.frame_size.std_dev, r.inter_frame.mean,
          r.inter_frame.std_dev, entry.model.fps,   "norm:" + entry.model.stream_id};
}

NormStats norm_stats_for(const SummaryStats& summary, std::string id) {
  if (!summary.frame_size || !summary.inter_frame) {
    throw EmptyDataError("Norm baseline needs frame size and inter-frame statistics");
  }
  const double fps = summary.inter_frame->mean > 0 ? 1.0 / summary.inter_frame->mean : 0.0;
  return {summary.frame_size->mean,  summary.frame_size->std_dev, summary.inter_frame->mean,
          summary.inter_frame->std_dev, fps,                      std::move(id)};
}

SyntheticTrace generate_norm(const NormStats& stats, const GenConfig& cfg) {
  validate(cfg);
  if (!(stats.frame_sd >= 0.0) || !(stats.inter_frame_sd >= 0.0)) {
    throw DomainError("Norm model standard deviations must be >= 0");
  }
  if (!(stats.frame_mean > 0.0)) {
    throw DomainError("Norm model frame mean must be > 0");
  }
  const double period = stats.inter_frame_mean > 0.0 ? stats.inter_frame_mean
                        : stats.fps > 0.0            ? 1.0 / stats.fps
                                                     : 0.0;
  if (!(period > 0.0)) {
    throw DomainError("Norm model needs an inter-frame mean or fps > 0");
  }
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  auto draw = [&](double mu, double sd, double floor, const char* what) {
    double v = mu + sd * normal(rng);
    if (cfg.floor_policy == FloorPolicy::kClamp) return std::max(v, floor);
    for (int i = 0; v < floor; ++i) {
      if (i == kMaxRejections) {
        throw DegenerateModelError(std::string(what) + " draws stayed below the floor");
      }
      v = mu + sd * normal(rng);
    }
    return v;
  };

  SyntheticTrace trace;
  trace.model_id = stats.id;
  trace.seed = cfg.seed;
  trace.policy = "frame";
  double t = 0.0;
  while (keep_going(cfg, trace.frames, t)) {
    const double size = draw(stats.frame_mean, stats.frame_sd, cfg.frame_size_floor, "frame size");
    const auto bytes = static_cast<std::uint32_t>(std::max<long long>(1, std::llround(size)));
    trace.packets.push_back(PacketRecord{from_seconds(t), bytes, true, true});
    t += draw(period, stats.inter_frame_sd, cfg.interval_floor, "inter-frame interval");
    ++trace.frames;
  }
  finish(trace, cfg);
  return trace;
}

std::array<std::uint8_t, 4> parse_ipv4(std::string_view text) {
  std::array<std::uint8_t, 4> out{};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    unsigned v = 256;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || v > 255 || (i < 3 && (next == end || *next != '.'))) {
      throw UsageError("invalid IPv4 address '" + std::string(text) + "'");
    }
    out[i] = static_cast<std::uint8_t>(v);
    p = i < 3 ? next + 1 : next;
  }
  if (p != end) throw UsageError("invalid IPv4 address '" + std::string(text) + "'");
  return out;
}

void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path,
                const PcapWriteOptions& options) {
  for (const auto& p : packets) {
    if (p.payload_size < kRtpHeaderSize) {
      throw DomainError("packet payload of " + std::to_string(p.payload_size) +
                        " bytes cannot hold a 12-byte RTP header");
    }
  }
  if (options.snaplen < kHeaderBytes + 2) {
    throw UsageError("snaplen must cover the Ethernet/IP/UDP headers and RTP marker");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");

  std::vector<std::byte> buf;
  auto flush = [&] {
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    buf.clear();
  };
  detail::store_le(buf, 0xA1B2C3D4, 4);
  detail::store_le(buf, 2, 2);
  detail::store_le(buf, 4, 2);
  detail::store_le(buf, 0, 4);
  detail::store_le(buf, 0, 4);
  detail::store_le(buf, options.snaplen, 4);
  detail::store_le(buf, 1, 4);  // Ethernet
  flush();

  constexpr std::uint32_t kSsrc = 0x58525447;
  std::uint16_t ip_id = 0;
  std::uint16_t rtp_seq = 0;
  std::uint32_t rtp_ts = 0;
  for (const auto& p : packets) {
    const auto micros = p.timestamp.count();
    if (p.frame_start) {
      rtp_ts = static_cast<std::uint32_t>((micros * 9) / 100);  // 90 kHz clock
    }
    const std::uint32_t chunks = (p.payload_size + kMaxUdpPayload - 1) / kMaxUdpPayload;
    for (std::uint32_t c = 0; c < chunks; ++c) {
      const std::uint32_t payload =
          p.payload_size / chunks + (c < p.payload_size % chunks ? 1u : 0u);
      const bool marker = p.rtp_marker && c + 1 == chunks;
      const std::uint32_t wire = kHeaderBytes + payload;
      const std::uint32_t captured = std::min(wire, options.snaplen);

      detail::store_le(buf, std::uint64_t(micros / 1'000'000), 4);
      detail::store_le(buf, std::uint64_t(micros % 1'000'000), 4);
      detail::store_le(buf, captured, 4);
      detail::store_le(buf, wire, 4);
      const std::size_t frame_start = buf.size();
      // Ethernet
      for (std::uint8_t b : {0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x00, 0x00, 0x00,
                             0x01}) {
        buf.push_back(std::byte{b});
      }
      detail::store_be(buf, 0x0800, 2);
      // IPv4
      const std::size_t ip = buf.size();
      detail::store_be(buf, 0x4500, 2);
      detail::store_be(buf, 20 + 8 + payload, 2);
      detail::store_be(buf, ip_id++, 2);
      detail::store_be(buf, 0x4000, 2);  // don't fragment
      detail::store_be(buf, 0x4011, 2);  // ttl 64, udp
      detail::store_be(buf, 0, 2);
      for (auto b : options.source_addr) buf.push_back(std::byte{b});
      for (auto b : options.dest_addr) buf.push_back(std::byte{b});
      const std::uint16_t csum = ipv4_checksum(buf, ip);
      buf[ip + 10] = std::byte(csum >> 8);
      buf[ip + 11] = std::byte(csum & 0xFF);
      // UDP
      detail::store_be(buf, options.udp_port, 2);
      detail::store_be(buf, options.udp_port, 2);
      detail::store_be(buf, 8 + payload, 2);
      detail::store_be(buf, 0, 2);
      // RTP
      buf.push_back(std::byte{0x80});
      buf.push_back(std::byte(marker ? 0x80 | 96 : 96));
      detail::store_be(buf, rtp_seq++, 2);
      detail::store_be(buf, rtp_ts, 4);
      detail::store_be(buf, kSsrc, 4);
      buf.resize(frame_start + captured, std::byte{0});
      if (buf.size() >= (1u << 20)) flush();
    }
  }
  flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_pcap(const SyntheticTrace& trace, const std::filesystem::path& path,
                const PcapWriteOptions& options) {
  write_pcap(std::span<const PacketRecord>(trace.packets), path, options);
}

ThroughputReport throughput_report(std::span<const PacketRecord> packets,
                                   std::optional<double> reference_mbps) {
  if (packets.size() < 2) {
    throw EmptyDataError("throughput needs at least two packets");
  }
  const double span = to_seconds(packets.back().timestamp - packets.front().timestamp);
  if (!(span > 0.0)) {
    throw EmptyDataError("throughput needs a trace spanning more than zero seconds");
  }
  double bits = 0.0;
  for (const auto& p : packets) bits += 8.0 * p.payload_size;
  ThroughputReport r;
  r.mean_mbps = bits / span / 1e6;
  if (reference_mbps) {
    if (!(*reference_mbps > 0.0)) throw DomainError("reference throughput must be > 0");
    r.reference_mbps = reference_mbps;
    r.error_pct = 100.0 * std::fabs(r.mean_mbps - *reference_mbps) / *reference_mbps;
  }
  return r;
}

std::string format_report_csv(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << "stream_id,policy,seed,duration_s,mean_mbps,ref_mbps,error_pct\n";
  char buf[64];
  for (const auto& row : rows) {
    os << row.stream_id << ',' << row.policy << ',' << row.seed << ',';
    std::snprintf(buf, sizeof buf, "%.6f", row.duration_s);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.6f", row.report.mean_mbps);
    os << buf << ',';
    if (row.report.reference_mbps) {
      std::snprintf(buf, sizeof buf, "%.6f", *row.report.reference_mbps);
      os << buf;
    }
    os << ',';
    if (row.report.error_pct) {
      std::snprintf(buf, sizeof buf, "%.4f", *row.report.error_pct);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace xrtg
