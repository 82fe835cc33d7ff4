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

#include "xrtg/rangrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "xrtg/error.hpp"

namespace xrtg {

Eigen::Index GridConfig::n_rb() const {
  const double rb_width = 12.0 * 15000.0 * double(1 << numerology);
  return Eigen::Index(std::floor(bandwidth_hz * (1.0 - guard_band) / rb_width));
}

Eigen::Index GridConfig::n_slots() const {
  return Eigen::Index(std::ceil(duration / slot_duration() - 1e-9));
}

void validate(const GridConfig& cfg) {
  if (cfg.numerology < 0 || cfg.numerology > 3) {
    throw UsageError("numerology must be in 0..3");
  }
  if (!(cfg.bandwidth_hz > 0.0) || !(cfg.guard_band >= 0.0 && cfg.guard_band < 1.0)) {
    throw UsageError("bandwidth must be > 0 and guard band in [0, 1)");
  }
  if (cfg.n_rb() < 1) {
    throw UsageError("bandwidth too small for a single resource block");
  }
  if (!(cfg.bits_per_rb > 0.0) || !(cfg.duration > 0.0) || cfg.tdd_pattern.empty()) {
    throw UsageError("grid needs bits_per_rb > 0, duration > 0 and a TDD pattern");
  }
}

double AllocationMatrix::bits(Eigen::Index rb, Eigen::Index slot) const {
  return std::clamp(served_bits[slot] - double(rb) * bits_per_rb, 0.0, bits_per_rb);
}

Eigen::MatrixXd AllocationMatrix::to_dense() const {
  Eigen::MatrixXd m(n_rb, n_slots());
  for (Eigen::Index s = 0; s < n_slots(); ++s) {
    for (Eigen::Index r = 0; r < n_rb; ++r) m(r, s) = bits(r, s);
  }
  return m;
}

AllocationMatrix schedule(std::span<const PacketRecord> packets, const GridConfig& cfg,
                          Direction direction) {
  validate(cfg);
  const Eigen::Index n_rb = cfg.n_rb();
  const Eigen::Index n_slots = cfg.n_slots();
  const std::int64_t slot_us = cfg.slot_micros();
  const double capacity = double(n_rb) * cfg.bits_per_rb;

  AllocationMatrix out;
  out.direction = direction;
  out.n_rb = n_rb;
  out.bits_per_rb = cfg.bits_per_rb;
  out.duration = cfg.duration;
  out.slot_duration = cfg.slot_duration();

  // Arrivals binned by the first slot in which they may be served.
  Eigen::VectorXd arrivals = Eigen::VectorXd::Zero(n_slots);
  if (!packets.empty()) {
    const Micros origin = packets.front().timestamp;
    const double last = to_seconds(packets.back().timestamp - origin);
    if (last > cfg.duration + 1e-9) {
      throw ConfigMismatchError("trace spans " + std::to_string(last) +
                                " s, longer than the grid duration " +
                                std::to_string(cfg.duration) + " s");
    }
    for (const auto& p : packets) {
      const std::int64_t t = (p.timestamp - origin).count();
      const Eigen::Index slot = Eigen::Index((t + slot_us - 1) / slot_us);
      const double bits = 8.0 * p.payload_size;
      out.offered_bits += bits;
      // A packet on the closing boundary is folded into the final slot.
      arrivals[std::min(slot, n_slots - 1)] += bits;
    }
  }

  std::vector<double> served;
  served.reserve(std::size_t(n_slots));
  double queue = 0.0;
  for (Eigen::Index s = 0; s < n_slots; ++s) {
    queue += arrivals[s];
    double x = 0.0;
    if (cfg.slot_direction(s) == direction && queue > 0.0) {
      if (queue >= capacity) ++out.saturated_slots;
      x = std::min(queue, capacity);
      queue -= x;
    }
    served.push_back(x);
  }
  out.saturation_warning = queue > 10.0 * capacity;
  if (!out.saturation_warning) {
    for (Eigen::Index s = n_slots; queue > 0.0; ++s) {
      double x = 0.0;
      if (cfg.slot_direction(s) == direction) {
        x = std::min(queue, capacity);
        queue -= x;
      }
      served.push_back(x);
    }
  }
  out.served_bits = Eigen::Map<const Eigen::VectorXd>(served.data(), Eigen::Index(served.size()));

  // t(i): full RBs as a range update, plus the partial RB of each slot.
  Eigen::VectorXd full_edges = Eigen::VectorXd::Zero(n_rb + 1);
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(n_rb + 1);
  for (double x : served) {
    if (x <= 0.0) continue;
    const auto full = std::min<Eigen::Index>(Eigen::Index(std::floor(x / cfg.bits_per_rb)), n_rb);
    full_edges[0] += cfg.bits_per_rb;
    full_edges[full] -= cfg.bits_per_rb;
    if (full < n_rb) partial[full] += x - double(full) * cfg.bits_per_rb;
  }
  out.rb_throughput.resize(n_rb);
  double running = 0.0;
  for (Eigen::Index i = 0; i < n_rb; ++i) {
    running += full_edges[i];
    out.rb_throughput[i] = (running + partial[i]) / cfg.duration;
  }
  return out;
}

double allocation_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate) {
  if (reference.size() != candidate.size()) {
    throw ConfigMismatchError("allocation vectors cover different RB counts");
  }
  const double denom = reference.sum();
  if (!(denom > 0.0)) {
    throw DomainError("allocation error is undefined for an all-zero reference");
  }
  return 100.0 * (reference - candidate).cwiseAbs().sum() / denom;
}

double allocation_error(const AllocationMatrix& reference, const AllocationMatrix& candidate) {
  if (reference.n_rb != candidate.n_rb || reference.direction != candidate.direction ||
      reference.duration != candidate.duration || reference.bits_per_rb != candidate.bits_per_rb) {
    throw ConfigMismatchError(
        "allocation matrices differ in RB count, duration, direction or RB capacity");
  }
  return allocation_error(reference.rb_throughput, candidate.rb_throughput);
}

std::string format_matrix_csv(const AllocationMatrix& matrix) {
  std::ostringstream os;
  os << "rb_index,slot_index,bits\n";
  char buf[32];
  for (Eigen::Index s = 0; s < matrix.n_slots(); ++s) {
    if (matrix.served_bits[s] <= 0.0) continue;
    for (Eigen::Index r = 0; r < matrix.n_rb; ++r) {
      const double b = matrix.bits(r, s);
      if (b <= 0.0) break;
      std::snprintf(buf, sizeof buf, "%.0f", b);
      os << r << ',' << s << ',' << buf << '\n';
    }
  }
  return os.str();
}

std::string format_rb_throughput_csv(const AllocationMatrix& matrix) {
  std::ostringstream os;
  os << "rb_index,throughput_bps\n";
  char buf[64];
  for (Eigen::Index r = 0; r < matrix.n_rb; ++r) {
    std::snprintf(buf, sizeof buf, "%.6f", matrix.rb_throughput[r]);
    os << r << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace xrtg
