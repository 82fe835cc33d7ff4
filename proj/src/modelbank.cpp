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

#include "xrtg/modelbank.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <vector>

#include "xrtg/error.hpp"

namespace xrtg {
namespace {

struct Fit {
  double location, scale, shape_a, shape_b, ks;
};

DistModel jsu(const Fit& f) {
  return DistModel::johnson_su({f.location, f.scale, f.shape_a, f.shape_b}, f.ks);
}

ArrayStats stats(double mean, double sd, double p95) { return {0, mean, sd, p95}; }

ModelBankEntry entry(std::string id, double fps, Direction dir, Fit frame, Fit inter_frame,
                     Fit inter_packet, ArrayStats frame_stats, ArrayStats inter_frame_ms,
                     ArrayStats inter_packet_us, ArrayStats packet_stats, double captured,
                     double gen_max, double gen_mean) {
  auto scaled = [](ArrayStats s, double k) {
    s.mean *= k;
    s.std_dev *= k;
    s.p95 *= k;
    return s;
  };
  StreamModel model{std::move(id),
                    fps,
                    jsu(frame),
                    jsu(inter_frame),
                    jsu(inter_packet),
                    PacketSizePolicy::max_packet(),
                    packet_stats.mean,
                    packet_stats.p95,
                    std::string(kBuiltinProvenance)};
  ReferenceStats ref{dir,
                     frame_stats,
                     scaled(inter_frame_ms, 1e-3),
                     scaled(inter_packet_us, 1e-6),
                     packet_stats,
                     captured,
                     gen_max,
                     gen_mean};
  return {std::move(model), ref};
}

// Published Johnson S_U fits (location, scale, shape_a, shape_b, KS) with the
// matching capture statistics and throughputs.
const std::vector<ModelBankEntry>& bank() {
  static const std::vector<ModelBankEntry> entries = [] {
    constexpr auto kUp = Direction::kUplink;
    constexpr auto kDown = Direction::kDownlink;
    std::vector<ModelBankEntry> v;
    v.push_back(entry("stream1-low", 60, kUp, {28205.00, 4990.40, -0.8691, 1.1236, 0.0270},
                      {0.0168, 0.000204, 0.0282, 1.2227, 0.0025},
                      {1.61e-6, 4.11e-8, -1.2004, 0.4658, 0.0820}, stats(34602.44, 9529.36, 55735),
                      stats(16.76, 0.26, 17.12), stats(3.94, 6.08, 17.10),
                      stats(1280.79, 356.58, 1428), 16.51, 16.49, 16.49));
    v.push_back(entry("stream1-med", 60, kUp, {73230.79, 12559.32, -0.7814, 1.1801, 0.0259},
                      {0.0168, 0.000621, 0.1143, 1.5517, 0.0059},
                      {1.71e-6, 4.08e-8, -1.1691, 0.5173, 0.0543},
                      stats(86149.87, 19936.04, 132384), stats(16.76, 0.50, 17.53),
                      stats(3.53, 5.47, 17.27), stats(1364.81, 244.83, 1428), 41.11, 41.15,
                      40.96));
    v.push_back(entry("stream1-high", 60, kUp, {220497.49, 20161.10, -0.4782, 1.2396, 0.0192},
                      {0.0151, 0.007549, -0.6793, 3.1580, 0.0221},
                      {1.86e-6, 16.50e-8, -1.4515, 0.7052, 0.0725},
                      stats(232084.33, 28141.99, 269008), stats(16.80, 2.57, 21.29),
                      stats(4.55, 11.02, 6.43), stats(1403.88, 154.31, 1428), 110.55, 110.50,
                      110.27));
    v.push_back(entry("stream2-72", 72, kDown, {216500.38, 52883.59, 0.1206, 0.8444, 0.0958},
                      {0.0139, 4.37e-5, -0.1091, 1.4920, 0.0165},
                      {1.59e-6, 5.40e-8, -1.2095, 0.5422, 0.0548},
                      stats(207968.42, 122929.70, 396402), stats(13.88, 0.05, 13.94),
                      stats(3.41, 9.18, 4.85), stats(1400.04, 171.38, 1428), 119.79, 121.36,
                      120.83));
    v.push_back(entry("stream2-90", 90, kDown, {-136187.45, 14897.10, -9.7610, 2.6910, 0.0504},
                      {0.0111, 2.30e-5, -0.1329, 1.5173, 0.0121},
                      {1.62e-6, 5.31e-8, -1.2583, 0.5210, 0.0523},
                      stats(163548.89, 116837.86, 339396), stats(11.11, 0.04, 11.17),
                      stats(3.66, 9.08, 6.91), stats(1392.66, 191.91, 1428), 117.76, 117.74,
                      118.60));
    v.push_back(entry("stream3-low", 60, kDown, {4144.51, 1962.34, -0.4428, 1.4412, 0.0177},
                      {0.0168, 0.0001, -0.0092, 1.0634, 0.0128},
                      {1.17e-6, 1.91e-8, -5.7054, 0.9577, 0.1805}, stats(4968.50, 2175.03, 7708),
                      stats(16.76, 0.20, 17.05), stats(7.01, 6.17, 15.04),
                      stats(749.83, 517.39, 1428), 2.37, 2.35, 2.36));
    v.push_back(entry("stream3-med", 60, kDown, {5547.72, 3879.20, -0.8572, 1.5868, 0.0115},
                      {0.0168, 0.0008, -0.0097, 1.6355, 0.0106},
                      {1.53e-6, 6.07e-8, -2.4255, 0.6070, 0.1781}, stats(8273.98, 3921.00, 13970),
                      stats(16.75, 0.61, 17.77), stats(5.87, 9.61, 15.34),
                      stats(933.53, 527.48, 1428), 3.95, 3.92, 3.94));
    v.push_back(entry("stream3-high", 60, kDown, {-3633.72, 16105.91, -3.8006, 2.9880, 0.0220},
                      {0.0164, 0.0023, -0.2288, 1.1306, 0.0227},
                      {2.14e-6, 20.70e-8, -0.9957, 0.4937, 0.0788},
                      stats(24378.90, 11440.59, 43458), stats(17.10, 3.30, 22.44),
                      stats(7.54, 24.80, 24.63), stats(1216.27, 419.88, 1428), 11.4, 11.44,
                      11.44));
    return v;
  }();
  return entries;
}

constexpr std::array<std::string_view, 8> kIds{"stream1-low", "stream1-med", "stream1-high",
                                               "stream2-72",  "stream2-90",  "stream3-low",
                                               "stream3-med", "stream3-high"};

constexpr std::array<std::string_view, 3> kBlocks{"frame_size", "inter_frame", "inter_packet"};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("model file: '" + where + "' is not a number: '" + std::string(text) + "'");
  }
  return v;
}

using Section = std::map<std::string, std::string, std::less<>>;

const std::string& require(const Section& section, const std::string& key,
                           const std::string& block) {
  const auto it = section.find(key);
  if (it == section.end()) {
    throw FormatError("model file: missing field '" + key + "' in " +
                      (block.empty() ? std::string("header") : "block [" + block + "]"));
  }
  return it->second;
}

DistModel parse_dist(const Section& section, const std::string& block) {
  DistModel d;
  d.family = family_from_string(require(section, "family", block));
  const auto names = param_names(d.family);
  d.params.resize(Eigen::Index(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string key(names[i]);
    d.params[Eigen::Index(i)] = parse_double(require(section, key, block), block + "." + key);
  }
  if (const auto it = section.find("ks"); it != section.end()) {
    d.ks = parse_double(it->second, block + ".ks");
  }
  return d;
}

}  // namespace

std::string to_string(const PacketSizePolicy& policy) {
  switch (policy.kind) {
    case PacketSizePolicy::Kind::kMaxPacket:
      return "max";
    case PacketSizePolicy::Kind::kMeanPacket:
      return "mean";
    case PacketSizePolicy::Kind::kExplicit:
      return "explicit:" + std::to_string(policy.explicit_bytes);
  }
  return "max";
}

PacketSizePolicy policy_from_string(std::string_view text) {
  if (text == "max" || text == "max-packet" || text == "MaxPacket") {
    return PacketSizePolicy::max_packet();
  }
  if (text == "mean" || text == "mean-packet" || text == "MeanPacket") {
    return PacketSizePolicy::mean_packet();
  }
  if (text.starts_with("explicit:")) text.remove_prefix(9);
  std::uint32_t bytes = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), bytes);
  if (ec != std::errc() || ptr != text.data() + text.size() || bytes == 0) {
    throw UsageError("invalid packet size policy '" + std::string(text) +
                     "' (valid: max, mean, explicit:<bytes>)");
  }
  return PacketSizePolicy::fixed(bytes);
}

void validate(const StreamModel& model) {
  if (!(model.fps > 0.0) || !std::isfinite(model.fps)) {
    throw DomainError("stream model fps must be > 0");
  }
  if (!(model.mean_packet > 0.0) || !(model.max_packet > 0.0) ||
      model.mean_packet > model.max_packet) {
    throw DomainError("stream model requires 0 < mean_packet <= max_packet");
  }
  if (model.packet_size_policy.kind == PacketSizePolicy::Kind::kExplicit &&
      model.packet_size_policy.explicit_bytes == 0) {
    throw DomainError("explicit packet size must be > 0");
  }
  validate(model.frame_size_dist);
  validate(model.inter_frame_dist);
  validate(model.inter_packet_dist);
}

std::uint32_t packet_size_bytes(const StreamModel& model,
                                std::optional<PacketSizePolicy> policy_override) {
  const PacketSizePolicy policy = policy_override.value_or(model.packet_size_policy);
  switch (policy.kind) {
    case PacketSizePolicy::Kind::kMaxPacket:
      return static_cast<std::uint32_t>(std::llround(model.max_packet));
    case PacketSizePolicy::Kind::kMeanPacket:
      return static_cast<std::uint32_t>(std::llround(model.mean_packet));
    case PacketSizePolicy::Kind::kExplicit:
      return policy.explicit_bytes;
  }
  return 0;
}

std::span<const std::string_view> builtin_ids() { return kIds; }

const ModelBankEntry& builtin_entry(std::string_view stream_id) {
  for (const auto& e : bank()) {
    if (e.model.stream_id == stream_id) return e;
  }
  std::string valid;
  for (auto id : kIds) {
    valid += (valid.empty() ? "" : ", ") + std::string(id);
  }
  throw LookupError("unknown built-in model '" + std::string(stream_id) + "' (valid: " + valid +
                    ")");
}

StreamModel builtin(std::string_view stream_id) { return builtin_entry(stream_id).model; }

std::string format_model(const StreamModel& model) {
  validate(model);
  std::ostringstream os;
  os << "# xrtg stream model\n";
  os << "format_version = " << kModelFormatVersion << "\n";
  os << "stream_id = " << model.stream_id << "\n";
  os << "provenance = " << model.provenance << "\n";
  os << "fps = " << format_double(model.fps) << "\n";
  os << "packet_size_policy = " << to_string(model.packet_size_policy) << "\n";
  os << "mean_packet = " << format_double(model.mean_packet) << "\n";
  os << "max_packet = " << format_double(model.max_packet) << "\n";
  const std::array<const DistModel*, 3> dists{&model.frame_size_dist, &model.inter_frame_dist,
                                              &model.inter_packet_dist};
  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    const DistModel& d = *dists[b];
    os << "\n[" << kBlocks[b] << "]\n";
    os << "family = " << to_string(d.family) << "\n";
    const auto names = param_names(d.family);
    for (std::size_t i = 0; i < names.size(); ++i) {
      os << names[i] << " = " << format_double(d.params[Eigen::Index(i)]) << "\n";
    }
    if (d.ks) os << "ks = " << format_double(*d.ks) << "\n";
  }
  return os.str();
}

StreamModel parse_model(std::string_view text) {
  Section header;
  std::map<std::string, Section, std::less<>> blocks;
  Section* current = &header;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError("model file line " + std::to_string(line_no) + ": unterminated block");
      }
      current = &blocks[std::string(trim(line.substr(1, line.size() - 2)))];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("model file line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    (*current)[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }

  const std::string& version = require(header, "format_version", "");
  if (version != kModelFormatVersion) {
    throw FormatError("model file: unsupported format_version '" + version + "' (expected '" +
                      std::string(kModelFormatVersion) + "')");
  }
  StreamModel m;
  m.stream_id = require(header, "stream_id", "");
  if (const auto it = header.find("provenance"); it != header.end()) m.provenance = it->second;
  m.fps = parse_double(require(header, "fps", ""), "fps");
  m.packet_size_policy = policy_from_string(require(header, "packet_size_policy", ""));
  m.mean_packet = parse_double(require(header, "mean_packet", ""), "mean_packet");
  m.max_packet = parse_double(require(header, "max_packet", ""), "max_packet");
  std::array<DistModel*, 3> dists{&m.frame_size_dist, &m.inter_frame_dist, &m.inter_packet_dist};
  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    const std::string name(kBlocks[b]);
    const auto it = blocks.find(name);
    if (it == blocks.end()) {
      throw FormatError("model file: missing distribution block [" + name + "]");
    }
    *dists[b] = parse_dist(it->second, name);
  }
  validate(m);
  return m;
}

void save_model(const StreamModel& model, const std::filesystem::path& path) {
  const std::string text = format_model(model);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

StreamModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

FittedStreamModel fit_stream_model(const FrameMetrics& metrics, double fps,
                                   std::span<const Family> families, std::string stream_id,
                                   const FitOptions& options) {
  if (families.empty()) {
    throw UsageError("at least one distribution family is required");
  }
  auto fit = [&](const Eigen::VectorXd& values, Units units, std::string_view name) {
    if (values.size() == 0) {
      throw EmptyDataError("metrics array '" + std::string(name) + "' is empty");
    }
    try {
      return select_best(EmpiricalSample::from(values, units), families, options);
    } catch (const FitError& e) {
      throw FitError("fitting '" + std::string(name) + "' failed: " + e.what());
    }
  };
  FittedStreamModel out;
  const auto launch = options.jobs > 1 ? std::launch::async : std::launch::deferred;
  auto frames = std::async(launch, fit, std::cref(metrics.frame_sizes), Units::kBytes,
                           "frame_sizes");
  auto gaps = std::async(launch, fit, std::cref(metrics.inter_frame_intervals),
                         Units::kSeconds, "inter_frame");
  out.inter_packet_ranking =
      fit(metrics.inter_packet_intervals, Units::kSeconds, "inter_packet");
  out.frame_size_ranking = frames.get();
  out.inter_frame_ranking = gaps.get();
  if (metrics.packet_sizes.size() == 0) {
    throw EmptyDataError("metrics array 'packet_sizes' is empty");
  }
  const ArrayStats packets = array_stats(metrics.packet_sizes);
  out.model = StreamModel{std::move(stream_id),
                          fps,
                          *out.frame_size_ranking.front().model,
                          *out.inter_frame_ranking.front().model,
                          *out.inter_packet_ranking.front().model,
                          PacketSizePolicy::max_packet(),
                          packets.mean,
                          std::max(packets.p95, packets.mean),
                          "fitted"};
  validate(out.model);
  return out;
}

StreamModel model_from_metrics(const FrameMetrics& metrics, double fps,
                               std::span<const Family> families, std::string stream_id,
                               const FitOptions& options) {
  return fit_stream_model(metrics, fps, families, std::move(stream_id), options).model;
}

}  // namespace xrtg
