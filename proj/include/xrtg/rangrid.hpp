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

#ifndef XRTG_RANGRID_HPP
#define XRTG_RANGRID_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xrtg/ingest.hpp"

namespace xrtg {

// 12 subcarriers x 14 symbols x 8 bits (256-QAM) x 2 layers x 0.75 code rate.
inline constexpr double kDefaultBitsPerRb = 12.0 * 14.0 * 8.0 * 2.0 * 0.75;

// Single-UE TDD grid with a fixed per-RB capacity.
struct GridConfig {
  double bandwidth_hz = 100e6;
  int numerology = 0;  // 0..3
  std::vector<Direction> tdd_pattern{Direction::kDownlink, Direction::kUplink};
  double bits_per_rb = kDefaultBitsPerRb;
  double duration = 1.0;  // seconds
  double guard_band = 0.1;

  std::int64_t slot_micros() const { return 1000 >> numerology; }
  double slot_duration() const { return 1e-3 / double(1 << numerology); }
  Eigen::Index n_rb() const;
  Eigen::Index n_slots() const;
  Direction slot_direction(Eigen::Index slot) const {
    return tdd_pattern[std::size_t(slot) % tdd_pattern.size()];
  }
};

void validate(const GridConfig& cfg);

// Allocation record for one direction. RBs are filled in ascending frequency
// order, so bits(rb, slot) follows from the bits served in each slot.
struct AllocationMatrix {
  Direction direction = Direction::kDownlink;
  Eigen::Index n_rb = 0;
  double bits_per_rb = 0.0;
  double duration = 0.0;
  double slot_duration = 0.0;
  Eigen::VectorXd served_bits;    // per slot; slots past the horizon hold the drained tail
  Eigen::VectorXd rb_throughput;  // t(i) in bits/s over the configured duration
  double offered_bits = 0.0;
  Eigen::Index saturated_slots = 0;
  bool saturation_warning = false;

  Eigen::Index n_slots() const { return served_bits.size(); }
  double bits(Eigen::Index rb, Eigen::Index slot) const;
  double total_bits() const { return served_bits.sum(); }
  Eigen::MatrixXd to_dense() const;  // rb x slot
};

// FIFO bit queue replay of a packet trace (timestamps taken relative to its
// first packet). Packets become eligible at the next slot boundary.
AllocationMatrix schedule(std::span<const PacketRecord> packets, const GridConfig& cfg,
                          Direction direction);

// 100 * sum_i |t_ref(i) - t_cand(i)| / sum_i t_ref(i)
double allocation_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate);
double allocation_error(const AllocationMatrix& reference, const AllocationMatrix& candidate);

std::string format_matrix_csv(const AllocationMatrix& matrix);
std::string format_rb_throughput_csv(const AllocationMatrix& matrix);

}  // namespace xrtg

#endif  // XRTG_RANGRID_HPP
