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

#ifndef XRTG_TRACEGEN_HPP
#define XRTG_TRACEGEN_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xrtg/ingest.hpp"
#include "xrtg/modelbank.hpp"

namespace xrtg {

// How consecutive frames are spaced in time.
enum class FrameTiming {
  // Each inter-frame draw separates the first packets of consecutive frames.
  kStartToStart,
  // The inter-frame draw is added after the frame's last packet.
  kAfterLastPacket,
};

// What to do with draws outside the floor/ceiling bounds.
enum class FloorPolicy { kClamp, kResample };

struct GenConfig {
  // Exactly one of n_frames / duration must be set.
  std::optional<std::int64_t> n_frames;
  std::optional<double> duration;  // seconds; frames start while t < duration
  std::uint64_t seed = 1;
  std::optional<PacketSizePolicy> policy;
  double frame_size_floor = 64.0;  // bytes
  double interval_floor = 0.0;     // seconds
  // One timestamp tick below the ingest gap threshold, so a written trace
  // re-ingests with the same frame boundaries.
  double inter_packet_ceiling = kDefaultGapThreshold - 1e-6;
  FrameTiming timing = FrameTiming::kStartToStart;
  FloorPolicy floor_policy = FloorPolicy::kClamp;

  static GenConfig frames(std::int64_t n, std::uint64_t seed = 1) {
    GenConfig c;
    c.n_frames = n;
    c.seed = seed;
    return c;
  }
  static GenConfig for_duration(double seconds, std::uint64_t seed = 1) {
    GenConfig c;
    c.duration = seconds;
    c.seed = seed;
    return c;
  }
};

void validate(const GenConfig& cfg);

struct SyntheticTrace {
  std::vector<PacketRecord> packets;
  std::string model_id;
  std::uint64_t seed = 0;
  std::string policy;
  double duration = 0.0;  // seconds
  std::int64_t frames = 0;

  StreamTrace as_stream_trace(Direction direction = Direction::kUplink) const;
};

// Packet-level synthesis: per frame, a size draw is split into
// max(1, round(size / s_IP)) packets of s_IP bytes separated by inter-packet
// draws; frames are separated by inter-frame draws.
SyntheticTrace generate(const StreamModel& model, const GenConfig& cfg);

// Frame-level Normal baseline: one record per frame holding all its bytes.
struct NormStats {
  double frame_mean = 0.0;  // bytes
  double frame_sd = 0.0;
  double inter_frame_mean = 0.0;  // seconds; <= 0 means 1 / fps
  double inter_frame_sd = 0.0;
  double fps = 0.0;
  std::string id = "norm";
};

NormStats norm_stats_for(const ModelBankEntry& entry);
NormStats norm_stats_for(const SummaryStats& summary, std::string id = "norm");

SyntheticTrace generate_norm(const NormStats& stats, const GenConfig& cfg);

struct PcapWriteOptions {
  std::uint16_t udp_port = 5004;
  std::array<std::uint8_t, 4> dest_addr{10, 0, 0, 2};
  std::array<std::uint8_t, 4> source_addr{10, 0, 0, 1};
  // Bytes of each link-layer frame stored in the file; the IP/UDP length
  // fields always carry the full size.
  std::uint32_t snaplen = 65535;
};

inline constexpr std::uint32_t kRtpHeaderSize = 12;
inline constexpr std::uint32_t kMaxUdpPayload = 65507;

// Classic little-endian microsecond pcap over Ethernet/IPv4/UDP with a minimal
// RTP header (marker on each frame's last packet). Records larger than one UDP
// datagram are split into datagrams sharing the timestamp.
void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path,
                const PcapWriteOptions& options = {});
void write_pcap(const SyntheticTrace& trace, const std::filesystem::path& path,
                const PcapWriteOptions& options = {});
std::array<std::uint8_t, 4> parse_ipv4(std::string_view text);

struct ThroughputReport {
  double mean_mbps = 0.0;
  std::optional<double> reference_mbps;
  std::optional<double> error_pct;
};

ThroughputReport throughput_report(std::span<const PacketRecord> packets,
                                   std::optional<double> reference_mbps = {});

struct ReportRow {
  std::string stream_id;
  std::string policy;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  ThroughputReport report;
};

std::string format_report_csv(std::span<const ReportRow> rows);

}  // namespace xrtg

#endif  // XRTG_TRACEGEN_HPP
