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

#ifndef XRTG_MODELBANK_HPP
#define XRTG_MODELBANK_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "xrtg/distfit.hpp"
#include "xrtg/ingest.hpp"

namespace xrtg {

// IP packet size used when splitting a frame into packets.
struct PacketSizePolicy {
  enum class Kind { kMaxPacket, kMeanPacket, kExplicit };
  Kind kind = Kind::kMaxPacket;
  std::uint32_t explicit_bytes = 0;

  static PacketSizePolicy max_packet() { return {Kind::kMaxPacket, 0}; }
  static PacketSizePolicy mean_packet() { return {Kind::kMeanPacket, 0}; }
  static PacketSizePolicy fixed(std::uint32_t bytes) { return {Kind::kExplicit, bytes}; }

  friend bool operator==(const PacketSizePolicy&, const PacketSizePolicy&) = default;
};

// "max", "mean" or "explicit:<bytes>" (a bare integer is also accepted).
std::string to_string(const PacketSizePolicy& policy);
PacketSizePolicy policy_from_string(std::string_view text);

struct StreamModel {
  std::string stream_id;
  double fps = 0.0;
  DistModel frame_size_dist;    // bytes
  DistModel inter_frame_dist;   // seconds
  DistModel inter_packet_dist;  // seconds
  PacketSizePolicy packet_size_policy;
  double mean_packet = 0.0;  // bytes
  double max_packet = 0.0;   // bytes, 95th percentile
  std::string provenance;

  friend bool operator==(const StreamModel&, const StreamModel&) = default;
};

void validate(const StreamModel& model);

// s_IP for a model under its own policy or an override.
std::uint32_t packet_size_bytes(const StreamModel& model,
                                std::optional<PacketSizePolicy> policy_override = {});

// Captured-traffic statistics published alongside each built-in model.
struct ReferenceStats {
  Direction direction = Direction::kUplink;
  ArrayStats frame_size;    // bytes
  ArrayStats inter_frame;   // seconds
  ArrayStats inter_packet;  // seconds
  ArrayStats packet_size;   // bytes
  double captured_mbps = 0.0;
  double generated_max_packet_mbps = 0.0;
  double generated_mean_packet_mbps = 0.0;
};

struct ModelBankEntry {
  StreamModel model;
  ReferenceStats reference;
};

inline constexpr std::string_view kBuiltinProvenance = "builtin:published-fit";

std::span<const std::string_view> builtin_ids();
const ModelBankEntry& builtin_entry(std::string_view stream_id);
StreamModel builtin(std::string_view stream_id);

inline constexpr std::string_view kModelFormatVersion = "xrtg-model v1";

std::string format_model(const StreamModel& model);
StreamModel parse_model(std::string_view text);
void save_model(const StreamModel& model, const std::filesystem::path& path);
StreamModel load_model(const std::filesystem::path& path);

struct FittedStreamModel {
  StreamModel model;
  std::vector<RankedFit> frame_size_ranking;
  std::vector<RankedFit> inter_frame_ranking;
  std::vector<RankedFit> inter_packet_ranking;
};

// Fits each metrics array, keeping the best-ranked family for each.
FittedStreamModel fit_stream_model(const FrameMetrics& metrics, double fps,
                                   std::span<const Family> families,
                                   std::string stream_id = "fitted",
                                   const FitOptions& options = {});
StreamModel model_from_metrics(const FrameMetrics& metrics, double fps,
                               std::span<const Family> families, std::string stream_id = "fitted",
                               const FitOptions& options = {});

}  // namespace xrtg

#endif  // XRTG_MODELBANK_HPP
