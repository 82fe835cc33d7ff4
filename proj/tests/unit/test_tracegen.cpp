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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "xrtg/error.hpp"
#include "xrtg/ingest.hpp"
#include "xrtg/modelbank.hpp"
#include "xrtg/tracegen.hpp"

using namespace xrtg;
using xrtg::testing::TempDir;

namespace {

// Johnson S_U with negligible spread: every draw equals `value` to ~1e-12.
DistModel point_mass(double value) {
  return DistModel::johnson_su({value, std::abs(value) * 1e-13, 0.0, 1.0});
}

StreamModel degenerate_model(double frame_bytes, double inter_packet, double inter_frame) {
  StreamModel m = builtin("stream1-low");
  m.stream_id = "point";
  m.frame_size_dist = point_mass(frame_bytes);
  m.inter_packet_dist = point_mass(inter_packet);
  m.inter_frame_dist = point_mass(inter_frame);
  return m;
}

std::vector<std::int64_t> micros(const SyntheticTrace& t) {
  std::vector<std::int64_t> v;
  for (const auto& p : t.packets) v.push_back(p.timestamp.count());
  return v;
}

}  // namespace

TEST_SUITE("generate") {
  TEST_CASE("degenerate model, start-to-start timing") {
    GenConfig cfg = GenConfig::frames(2, 1);
    cfg.policy = PacketSizePolicy::fixed(1428);
    const SyntheticTrace t = generate(degenerate_model(3000, 2e-6, 0.016), cfg);
    REQUIRE(t.packets.size() == 4);
    for (const auto& p : t.packets) CHECK(p.payload_size == 1428);
    CHECK(micros(t) == std::vector<std::int64_t>{0, 2, 16000, 16002});
    CHECK(t.packets[0].frame_start);
    CHECK_FALSE(t.packets[1].frame_start);
    CHECK(t.packets[2].frame_start);
    CHECK_FALSE(t.packets[0].rtp_marker);
    CHECK(t.packets[1].rtp_marker);
    CHECK(t.frames == 2);
  }

  TEST_CASE("degenerate model, gap after the last packet") {
    GenConfig cfg = GenConfig::frames(2, 1);
    cfg.policy = PacketSizePolicy::fixed(1428);
    cfg.timing = FrameTiming::kAfterLastPacket;
    const SyntheticTrace t = generate(degenerate_model(3000, 2e-6, 0.016), cfg);
    CHECK(micros(t) == std::vector<std::int64_t>{0, 2, 16002, 16004});
  }

  TEST_CASE("at least one packet per frame") {
    GenConfig cfg = GenConfig::frames(3, 1);
    cfg.policy = PacketSizePolicy::fixed(4000);
    const SyntheticTrace t = generate(degenerate_model(3000, 2e-6, 0.016), cfg);
    REQUIRE(t.packets.size() == 3);
    for (const auto& p : t.packets) {
      CHECK(p.payload_size == 4000);
      CHECK(p.frame_start);
      CHECK(p.rtp_marker);
    }
  }

  TEST_CASE("a long frame delays the next one") {
    // 10 packets x 3 ms exceed the 16 ms frame period.
    GenConfig cfg = GenConfig::frames(2, 1);
    cfg.policy = PacketSizePolicy::fixed(100);
    cfg.inter_packet_ceiling = 1.0;
    const SyntheticTrace t = generate(degenerate_model(1000, 3e-3, 0.016), cfg);
    CHECK(t.packets[10].timestamp == t.packets[9].timestamp);
    CHECK(t.packets[10].frame_start);
  }

  TEST_CASE("seed determinism") {
    const StreamModel m = builtin("stream2-90");
    CHECK(generate(m, GenConfig::frames(500, 9)).packets ==
          generate(m, GenConfig::frames(500, 9)).packets);
    CHECK(generate(m, GenConfig::frames(500, 9)).packets !=
          generate(m, GenConfig::frames(500, 10)).packets);
  }

  TEST_CASE("duration bounds frame starts") {
    const SyntheticTrace t = generate(builtin("stream3-low"), GenConfig::for_duration(2.0, 4));
    CHECK(t.duration == 2.0);
    Micros last_start{0};
    for (const auto& p : t.packets) {
      if (p.frame_start) last_start = p.timestamp;
    }
    CHECK(to_seconds(last_start) < 2.0);
    CHECK(t.frames == doctest::Approx(2.0 / 0.01676).epsilon(0.1));
  }

  TEST_CASE("frame count survives marking") {
    for (auto id : builtin_ids()) {
      const SyntheticTrace t = generate(builtin(id), GenConfig::frames(3000, 21));
      const FrameMetrics m = compute_metrics(mark_frames(t.as_stream_trace()));
      CAPTURE(id);
      CHECK(m.frame_sizes.size() == 3000);
      CHECK(m.inter_packet_intervals.maxCoeff() < kDefaultGapThreshold);
    }
  }

  TEST_CASE("floors") {
    const StreamModel m = builtin("stream2-72");
    GenConfig clamp = GenConfig::frames(20000, 2);
    GenConfig resample = clamp;
    resample.floor_policy = FloorPolicy::kResample;
    const auto frames_of = [](const SyntheticTrace& t) {
      return compute_metrics(mark_frames(t.as_stream_trace())).frame_sizes;
    };
    const Eigen::VectorXd a = frames_of(generate(m, clamp));
    const Eigen::VectorXd b = frames_of(generate(m, resample));
    // Clamped draws still emit one packet.
    CHECK(a.minCoeff() == 1428.0);
    CHECK(b.minCoeff() == 1428.0);
    // About 5% of this fit lies below the floor; rejection shifts the mean up.
    CHECK(b.mean() > a.mean());
  }

  TEST_CASE("mean throughput follows the generating means") {
    for (auto id : builtin_ids()) {
      const StreamModel m = builtin(id);
      for (const auto& policy : {PacketSizePolicy::max_packet(), PacketSizePolicy::mean_packet()}) {
        GenConfig cfg = GenConfig::frames(30000, 3);
        cfg.policy = policy;
        const double got = throughput_report(generate(m, cfg).packets).mean_mbps;
        const double want = mean(m.frame_size_dist) * 8.0 / mean(m.inter_frame_dist) / 1e6;
        const double err = (got - want) / want;
        CAPTURE(id);
        CAPTURE(to_string(policy));
        if (id == "stream2-72") {
          // Its fit has ~5% mass below 64 B; clamped frames inflate the mean.
          CHECK(err > 0.03);
          CHECK(err < 0.06);
        } else {
          CHECK(std::abs(err) < 0.01);
        }
      }
    }
  }

  TEST_CASE("published throughput at full length") {
    const SyntheticTrace t = generate(builtin("stream1-high"), GenConfig::for_duration(600.0, 1));
    CHECK(throughput_report(t.packets).mean_mbps == doctest::Approx(110.55).epsilon(0.02));
    GenConfig cfg = GenConfig::for_duration(600.0, 1);
    cfg.policy = PacketSizePolicy::max_packet();
    const ThroughputReport r =
        throughput_report(generate(builtin("stream3-low"), cfg).packets, 2.37);
    CHECK(*r.error_pct <= 2.0);
  }

  TEST_CASE("configuration errors") {
    GenConfig both = GenConfig::frames(3);
    both.duration = 1.0;
    CHECK_THROWS_AS(generate(builtin("stream1-low"), both), UsageError);
    CHECK_THROWS_AS(generate(builtin("stream1-low"), GenConfig{}), UsageError);
    CHECK_THROWS_AS(generate(builtin("stream1-low"), GenConfig::frames(0)), UsageError);
    CHECK_THROWS_AS(generate(builtin("stream1-low"), GenConfig::for_duration(-1.0)), UsageError);
  }

  TEST_CASE("unsatisfiable rejection floor") {
    GenConfig cfg = GenConfig::frames(1, 1);
    cfg.floor_policy = FloorPolicy::kResample;
    cfg.frame_size_floor = 1e9;
    CHECK_THROWS_AS(generate(degenerate_model(3000, 2e-6, 0.016), cfg), DegenerateModelError);
  }
}

TEST_SUITE("generate_norm") {
  TEST_CASE("zero variance") {
    NormStats s;
    s.frame_mean = 3000;
    s.inter_frame_mean = 1.0 / 60.0;
    const SyntheticTrace t = generate_norm(s, GenConfig::frames(3, 1));
    REQUIRE(t.packets.size() == 3);
    CHECK(micros(t) == std::vector<std::int64_t>{0, 16667, 33333});
    for (const auto& p : t.packets) {
      CHECK(p.payload_size == 3000);
      CHECK(p.frame_start);
      CHECK(p.rtp_marker);
    }
  }

  TEST_CASE("stream1-med statistics") {
    NormStats s{86149.87, 19936.04, 0.01676, 0.00050, 60.0, "norm"};
    const SyntheticTrace t = generate_norm(s, GenConfig::for_duration(600.0, 2));
    const double oracle = 86149.87 * 8.0 / 0.01676 / 1e6;
    CHECK(oracle == doctest::Approx(41.11).epsilon(0.03));
    CHECK(throughput_report(t.packets).mean_mbps == doctest::Approx(41.11).epsilon(0.03));
    CHECK(throughput_report(t.packets).mean_mbps == doctest::Approx(oracle).epsilon(0.01));
  }

  TEST_CASE("from builtin references and summaries") {
    const NormStats s = norm_stats_for(builtin_entry("stream3-med"));
    CHECK(s.frame_mean == 8273.98);
    CHECK(s.inter_frame_mean == doctest::Approx(0.01675));
    SummaryStats sum;
    sum.frame_size = ArrayStats{10, 500.0, 20.0, 530.0};
    sum.inter_frame = ArrayStats{9, 0.02, 0.001, 0.021};
    const NormStats t = norm_stats_for(sum, "x");
    CHECK(t.fps == doctest::Approx(50.0));
    CHECK_THROWS_AS(norm_stats_for(SummaryStats{}), EmptyDataError);
  }

  TEST_CASE("negative deviation") {
    NormStats s{1000, -1, 0.016, 0.0, 60.0, "bad"};
    CHECK_THROWS_AS(generate_norm(s, GenConfig::frames(3)), DomainError);
  }
}

TEST_SUITE("write_pcap") {
  TEST_CASE("file layout") {
    TempDir dir("pcap_layout");
    const std::vector<PacketRecord> p{{Micros(1'500'000), 100, true, true}};
    write_pcap(p, dir / "one.pcap");
    const std::string bytes = xrtg::testing::slurp(dir / "one.pcap");
    REQUIRE(bytes.size() == 24 + 16 + 14 + 20 + 8 + 100);
    auto u8 = [&](std::size_t i) { return static_cast<unsigned>(static_cast<unsigned char>(bytes[i])); };
    auto le32 = [&](std::size_t i) { return u8(i) | u8(i + 1) << 8 | u8(i + 2) << 16 | u8(i + 3) << 24; };
    auto be16 = [&](std::size_t i) { return u8(i) << 8 | u8(i + 1); };
    CHECK(le32(0) == 0xA1B2C3D4u);
    CHECK(le32(20) == 1u);
    CHECK(le32(24) == 1u);        // seconds
    CHECK(le32(28) == 500000u);   // microseconds
    const std::size_t ip = 24 + 16 + 14;
    CHECK(be16(ip - 2) == 0x0800);
    CHECK(be16(ip + 2) == 20 + 8 + 100);
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < 20; i += 2) sum += be16(ip + i);
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    CHECK(sum == 0xFFFF);
    CHECK(be16(ip + 20 + 2) == 5004);
    CHECK(be16(ip + 20 + 4) == 108);
    const std::size_t rtp = ip + 28;
    CHECK(u8(rtp) == 0x80);
    CHECK(u8(rtp + 1) == (0x80 | 96));
  }

  TEST_CASE("metrics survive the round trip") {
    TempDir dir("pcap_rt");
    const SyntheticTrace t = generate(builtin("stream1-med"), GenConfig::frames(500, 12));
    PcapWriteOptions o;
    o.snaplen = 128;
    o.udp_port = 6000;
    write_pcap(t, dir / "t.pcap", o);
    const FrameMetrics a = compute_metrics(mark_frames(t.as_stream_trace()));
    const FrameMetrics b = compute_metrics(mark_frames(read_pcap(dir / "t.pcap", 6000)));
    CHECK(a.frame_sizes == b.frame_sizes);
    CHECK(a.packet_sizes == b.packet_sizes);
    CHECK(a.inter_frame_intervals == b.inter_frame_intervals);
    CHECK(a.inter_packet_intervals == b.inter_packet_intervals);
  }

  TEST_CASE("oversize records are split into datagrams") {
    TempDir dir("pcap_split");
    const std::vector<PacketRecord> p{{Micros(0), 150000, true, true},
                                      {Micros(16667), 200, true, true}};
    PcapWriteOptions o;
    o.snaplen = 64;
    write_pcap(p, dir / "big.pcap", o);
    const StreamTrace t = read_pcap(dir / "big.pcap", 5004);
    REQUIRE(t.packets.size() == 4);
    CHECK(t.packets[0].payload_size + t.packets[1].payload_size + t.packets[2].payload_size ==
          150000);
    CHECK_FALSE(t.packets[1].rtp_marker);
    CHECK(t.packets[2].rtp_marker);
    const FrameMetrics m = compute_metrics(mark_frames(t));
    CHECK(m.frame_sizes == Eigen::Vector2d(150000, 200));
  }

  TEST_CASE("payload too small for RTP") {
    TempDir dir("pcap_small");
    const std::vector<PacketRecord> p{{Micros(0), 8, true, true}};
    CHECK_THROWS_AS(write_pcap(p, dir / "x.pcap"), DomainError);
  }

  TEST_CASE("address parsing") {
    CHECK(parse_ipv4("192.168.0.7") == std::array<std::uint8_t, 4>{192, 168, 0, 7});
    CHECK_THROWS_AS(parse_ipv4("300.1.1.1"), UsageError);
    CHECK_THROWS_AS(parse_ipv4("1.2.3"), UsageError);
  }
}

TEST_SUITE("throughput_report") {
  TEST_CASE("arithmetic") {
    const std::vector<PacketRecord> p{{Micros(0), 1000, true, true},
                                      {Micros(1'000'000), 1000, true, true}};
    const ThroughputReport r = throughput_report(p);
    CHECK(r.mean_mbps == doctest::Approx(0.016));
    CHECK_FALSE(r.reference_mbps);
    CHECK_FALSE(r.error_pct);
    const ThroughputReport e = throughput_report(p, 0.020);
    CHECK(*e.error_pct == doctest::Approx(20.0));
  }

  TEST_CASE("degenerate spans") {
    const std::vector<PacketRecord> one{{Micros(0), 1000, true, true}};
    CHECK_THROWS_AS(throughput_report(one), EmptyDataError);
    const std::vector<PacketRecord> same{{Micros(5), 1000, true, true},
                                         {Micros(5), 1000, true, true}};
    CHECK_THROWS_AS(throughput_report(same), EmptyDataError);
  }

  TEST_CASE("csv") {
    const std::vector<ReportRow> rows{
        {"stream3-low", "max", 7, 600.0, ThroughputReport{2.35, 2.37, 0.8439}},
        {"norm", "frame", 1, 1.5, ThroughputReport{1.0, std::nullopt, std::nullopt}}};
    CHECK(format_report_csv(rows) ==
          "stream_id,policy,seed,duration_s,mean_mbps,ref_mbps,error_pct\n"
          "stream3-low,max,7,600.000000,2.350000,2.370000,0.8439\n"
          "norm,frame,1,1.500000,1.000000,,\n");
  }
}
