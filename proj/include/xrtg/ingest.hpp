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

#ifndef XRTG_INGEST_HPP
#define XRTG_INGEST_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace xrtg {

using Micros = std::chrono::microseconds;

inline double to_seconds(Micros t) { return std::chrono::duration<double>(t).count(); }
// Rounds to the nearest microsecond.
Micros from_seconds(double seconds);

struct PacketRecord {
  Micros timestamp{0};
  std::uint32_t payload_size = 0;
  bool frame_start = false;
  bool rtp_marker = false;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

enum class Direction { kUplink, kDownlink };
std::string_view to_string(Direction direction);
Direction direction_from_string(std::string_view name);

struct StreamTrace {
  std::vector<PacketRecord> packets;
  std::string source;
  Direction direction = Direction::kUplink;
};

// The arrays the traffic models are fitted to. Sizes in bytes, intervals in seconds.
struct FrameMetrics {
  Eigen::VectorXd frame_sizes;
  Eigen::VectorXd inter_frame_intervals;
  Eigen::VectorXd inter_packet_intervals;
  Eigen::VectorXd packet_sizes;
};

struct ArrayStats {
  Eigen::Index count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double p95 = 0.0;      // nearest rank
};

// An absent entry means the corresponding array was empty.
struct SummaryStats {
  std::optional<ArrayStats> frame_size;
  std::optional<ArrayStats> inter_frame;
  std::optional<ArrayStats> inter_packet;
  std::optional<ArrayStats> packet_size;
};

inline constexpr double kDefaultGapThreshold = 1e-3;

// Classic libpcap captures (either byte order, microsecond or nanosecond
// timestamps) over Ethernet, Linux cooked (v1/v2), BSD loopback or raw IP.
// Keeps UDP datagrams whose source or destination port is udp_port.
StreamTrace read_pcap(const std::filesystem::path& path, std::uint16_t udp_port,
                      Direction direction = Direction::kUplink);
StreamTrace parse_pcap(std::span<const std::byte> bytes, std::uint16_t udp_port,
                       std::string source = "<memory>", Direction direction = Direction::kUplink);

// Packet i starts a frame iff i == 0, packet i-1 carried the RTP marker, or
// the gap from packet i-1 exceeds gap_threshold seconds.
StreamTrace mark_frames(const StreamTrace& trace, double gap_threshold = kDefaultGapThreshold);

FrameMetrics compute_metrics(const StreamTrace& trace);

ArrayStats array_stats(const Eigen::VectorXd& values);
SummaryStats summarize(const FrameMetrics& metrics);

void export_metrics(const FrameMetrics& metrics, const std::filesystem::path& path);
FrameMetrics import_metrics(const std::filesystem::path& path);
std::vector<std::byte> encode_metrics(const FrameMetrics& metrics);
FrameMetrics decode_metrics(std::span<const std::byte> bytes);

}  // namespace xrtg

#endif  // XRTG_INGEST_HPP
