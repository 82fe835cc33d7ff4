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

#include "xrtg/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xrtg/distfit.hpp"
#include "xrtg/error.hpp"
#include "xrtg/ingest.hpp"
#include "xrtg/modelbank.hpp"
#include "xrtg/rangrid.hpp"
#include "xrtg/tracegen.hpp"

namespace xrtg::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kKsWarning = 0.1;
constexpr double kSpanTolerance = 0.01;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

fs::path under(const fs::path& out, const std::string& name) {
  fs::path p(name);
  return p.is_absolute() ? p : out / p;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<Family> parse_families(const std::string& text) {
  std::vector<Family> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    try {
      out.push_back(family_from_string(item));
    } catch (const LookupError& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--families needs at least one distribution family");
  return out;
}

std::string stats_csv(const SummaryStats& s) {
  std::ostringstream os;
  os << "array,count,mean,std,p95\n";
  auto row = [&](const char* name, const std::optional<ArrayStats>& a) {
    os << name << ',';
    if (!a) {
      os << "0,,,\n";
      return;
    }
    os << a->count << ',' << fmt("%.10g", a->mean) << ',' << fmt("%.10g", a->std_dev) << ','
       << fmt("%.10g", a->p95) << '\n';
  };
  row("frame_size", s.frame_size);
  row("inter_frame", s.inter_frame);
  row("inter_packet", s.inter_packet);
  row("packet_size", s.packet_size);
  return os.str();
}

std::string ranking_csv(const FittedStreamModel& fitted) {
  std::ostringstream os;
  os << "array,rank,family,ks,status\n";
  auto rows = [&](const char* name, const std::vector<RankedFit>& ranking) {
    int rank = 1;
    for (const auto& r : ranking) {
      std::string status = r.model ? "ok" : r.failure;
      std::replace(status.begin(), status.end(), ',', ';');
      std::replace(status.begin(), status.end(), '\n', ' ');
      os << name << ',' << rank++ << ',' << to_string(r.family) << ','
         << fmt("%.6f", r.ks) << ',' << status << '\n';
    }
  };
  rows("frame_size", fitted.frame_size_ranking);
  rows("inter_frame", fitted.inter_frame_ranking);
  rows("inter_packet", fitted.inter_packet_ranking);
  return os.str();
}

void warn_high_ks(const StreamModel& model, std::ostream& err) {
  const std::pair<const char*, const DistModel*> dists[] = {
      {"frame_size", &model.frame_size_dist},
      {"inter_frame", &model.inter_frame_dist},
      {"inter_packet", &model.inter_packet_dist}};
  for (const auto& [name, d] : dists) {
    if (d->ks && *d->ks > kKsWarning) {
      err << "xrtg: warning: " << model.stream_id << " " << name << " fit has KS "
          << fmt("%.4f", *d->ks) << " > " << kKsWarning
          << "; samples may not follow the captured data\n";
    }
  }
}

StreamTrace load_trace(const std::string& path, std::uint16_t port, Direction dir) {
  return read_pcap(path, port, dir);
}

double trace_span(const StreamTrace& trace) {
  return to_seconds(trace.packets.back().timestamp - trace.packets.front().timestamp);
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// ---- ingest

struct IngestArgs {
  std::string pcap;
  std::uint16_t port = 5004;
  double gap_threshold = kDefaultGapThreshold;
  std::string direction = "uplink";
  std::string out_dir;
};

int cmd_ingest(const IngestArgs& a, Context& ctx) {
  const Direction dir = direction_from_string(a.direction);
  const StreamTrace marked = mark_frames(load_trace(a.pcap, a.port, dir), a.gap_threshold);
  const FrameMetrics metrics = compute_metrics(marked);
  const SummaryStats stats = summarize(metrics);

  const fs::path out = prepare_out(a.out_dir);
  export_metrics(metrics, out / "metrics.xrtgm");
  write_text(out / "stats.csv", stats_csv(stats));
  write_manifest({"ingest",
                  {a.pcap},
                  {},
                  std::nullopt,
                  a.out_dir,
                  utc_timestamp(),
                  {{"port", std::to_string(a.port)},
                   {"gap_threshold", fmt("%.17g", a.gap_threshold)},
                   {"direction", std::string(to_string(dir))}}},
                 out);
  ctx.out << "ingested " << marked.packets.size() << " packets, "
          << metrics.frame_sizes.size() << " frames -> " << (out / "metrics.xrtgm").string()
          << ", " << (out / "stats.csv").string() << '\n';
  return 0;
}

// ---- fit

struct FitArgs {
  std::string metrics;
  std::string families = "johnson_su,normal,exp_mod_normal";
  std::optional<double> fps;
  std::string id;
  int jobs = 1;
  std::string out_dir;
};

int cmd_fit(const FitArgs& a, Context& ctx) {
  const std::vector<Family> families = parse_families(a.families);
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");
  const FrameMetrics metrics = import_metrics(a.metrics);

  double fps = a.fps.value_or(0.0);
  if (!a.fps) {
    if (metrics.inter_frame_intervals.size() == 0) {
      throw EmptyDataError("metrics array 'inter_frame' is empty; pass --fps");
    }
    fps = 1.0 / metrics.inter_frame_intervals.mean();
  }
  if (!(fps > 0.0)) throw UsageError("--fps must be > 0");
  const std::string id = a.id.empty() ? fs::path(a.metrics).stem().string() : a.id;

  FitOptions options;
  options.jobs = a.jobs;
  const FittedStreamModel fitted = fit_stream_model(metrics, fps, families, id, options);

  const fs::path out = prepare_out(a.out_dir);
  const fs::path model_path = out / (id + ".model");
  save_model(fitted.model, model_path);
  write_text(out / "ks_ranking.csv", ranking_csv(fitted));
  write_manifest({"fit",
                  {a.metrics},
                  {id},
                  std::nullopt,
                  a.out_dir,
                  utc_timestamp(),
                  {{"families", a.families},
                   {"fps", fmt("%.17g", fps)},
                   {"jobs", std::to_string(a.jobs)}}},
                 out);
  ctx.out << "fitted " << id << " -> " << model_path.string() << ", "
          << (out / "ks_ranking.csv").string() << '\n';
  return 0;
}

// ---- generate

struct GenerateArgs {
  std::string model_path;
  std::string builtin_id;
  std::string policy;
  std::uint64_t seed = 1;
  std::optional<double> duration;
  std::optional<std::int64_t> frames;
  std::string pcap_out;
  std::string report = "report.csv";
  bool norm = false;
  std::string stats;
  std::optional<double> reference_mbps;
  std::uint16_t port = 5004;
  std::uint32_t snaplen = 128;
  bool no_ks_warning = false;
  std::string out_dir;
};

int cmd_generate(const GenerateArgs& a, Context& ctx) {
  if (a.model_path.empty() == a.builtin_id.empty()) {
    throw UsageError("exactly one of --model or --builtin is required");
  }
  if (a.duration.has_value() == a.frames.has_value()) {
    throw UsageError("exactly one of --duration or --frames is required");
  }
  GenConfig cfg;
  cfg.seed = a.seed;
  cfg.duration = a.duration;
  cfg.n_frames = a.frames;
  if (!a.policy.empty()) cfg.policy = policy_from_string(a.policy);
  validate(cfg);

  StreamModel model;
  std::optional<double> reference = a.reference_mbps;
  std::optional<ReferenceStats> ref_stats;
  if (!a.builtin_id.empty()) {
    const ModelBankEntry& entry = builtin_entry(a.builtin_id);
    model = entry.model;
    ref_stats = entry.reference;
    if (!reference) reference = entry.reference.captured_mbps;
  } else {
    model = load_model(a.model_path);
  }

  SyntheticTrace trace;
  if (a.norm) {
    NormStats ns;
    if (!a.stats.empty()) {
      ns = norm_stats_for(summarize(import_metrics(a.stats)), model.stream_id);
    } else if (ref_stats) {
      ns = norm_stats_for(builtin_entry(a.builtin_id));
    } else {
      throw UsageError("--norm with --model needs --stats METRICS");
    }
    if (!(ns.fps > 0.0)) ns.fps = model.fps;
    trace = generate_norm(ns, cfg);
  } else {
    if (!a.no_ks_warning) warn_high_ks(model, ctx.err);
    trace = generate(model, cfg);
  }

  const fs::path out = prepare_out(a.out_dir);
  std::vector<std::string> outputs;
  if (!a.pcap_out.empty()) {
    PcapWriteOptions po;
    po.udp_port = a.port;
    po.snaplen = a.snaplen;
    const fs::path p = under(out, a.pcap_out);
    write_pcap(trace, p, po);
    outputs.push_back(p.string());
  }
  const ReportRow row{trace.model_id, trace.policy, trace.seed, trace.duration,
                      throughput_report(trace.packets, reference)};
  const fs::path report_path = under(out, a.report);
  write_text(report_path, format_report_csv(std::span(&row, 1)));
  outputs.push_back(report_path.string());

  std::vector<std::pair<std::string, std::string>> opts{
      {"policy", trace.policy},
      {"generator", a.norm ? "norm" : "packet"},
      {"port", std::to_string(a.port)},
      {"snaplen", std::to_string(a.snaplen)}};
  if (a.duration) opts.emplace_back("duration", fmt("%.17g", *a.duration));
  if (a.frames) opts.emplace_back("frames", std::to_string(*a.frames));
  if (!a.pcap_out.empty()) opts.emplace_back("pcap_out", a.pcap_out);
  opts.emplace_back("report", a.report);
  std::vector<std::string> inputs;
  if (!a.model_path.empty()) inputs.push_back(a.model_path);
  if (!a.stats.empty()) inputs.push_back(a.stats);
  write_manifest({"generate", inputs, {model.stream_id}, a.seed, a.out_dir, utc_timestamp(),
                  std::move(opts)},
                 out);

  ctx.out << "generated " << trace.frames << " frames, " << trace.packets.size()
          << " packets, mean " << fmt("%.3f", row.report.mean_mbps) << " Mbps";
  if (row.report.error_pct) ctx.out << " (error " << fmt("%.2f", *row.report.error_pct) << "%)";
  ctx.out << '\n';
  for (const auto& o : outputs) ctx.out << "  wrote " << o << '\n';
  return 0;
}

// ---- allocate

struct AllocateArgs {
  std::string trace_a;
  std::string trace_b;
  double bandwidth = 100e6;
  int mu = 0;
  std::string direction = "downlink";
  std::uint16_t port = 5004;
  std::optional<double> bits_per_rb;
  bool matrices = false;
  std::string out_dir;
};

int cmd_allocate(const AllocateArgs& a, Context& ctx) {
  const Direction dir = direction_from_string(a.direction);
  const StreamTrace ref = load_trace(a.trace_a, a.port, dir);
  const StreamTrace cand = load_trace(a.trace_b, a.port, dir);
  const double span_a = trace_span(ref);
  const double span_b = trace_span(cand);
  if (std::abs(span_a - span_b) > kSpanTolerance * std::max(span_a, span_b)) {
    throw ConfigMismatchError("trace durations differ: " + fmt("%.6f", span_a) + " s vs " +
                              fmt("%.6f", span_b) + " s");
  }

  GridConfig grid;
  grid.bandwidth_hz = a.bandwidth;
  grid.numerology = a.mu;
  if (a.bits_per_rb) grid.bits_per_rb = *a.bits_per_rb;
  validate(grid);
  const double slot = grid.slot_duration();
  grid.duration = std::max(1.0, std::ceil(std::max(span_a, span_b) / slot)) * slot;

  const AllocationMatrix ma = schedule(ref.packets, grid, dir);
  const AllocationMatrix mb = schedule(cand.packets, grid, dir);
  const double e = allocation_error(ma, mb);

  const fs::path out = prepare_out(a.out_dir);
  write_text(out / "rb_throughput_a.csv", format_rb_throughput_csv(ma));
  write_text(out / "rb_throughput_b.csv", format_rb_throughput_csv(mb));
  if (a.matrices) {
    write_text(out / "matrix_a.csv", format_matrix_csv(ma));
    write_text(out / "matrix_b.csv", format_matrix_csv(mb));
  }
  std::ostringstream report;
  report << "direction,bandwidth_hz,numerology,n_rb,duration_s,saturated_a,saturated_b,"
            "error_pct\n"
         << to_string(dir) << ',' << fmt("%.0f", grid.bandwidth_hz) << ',' << grid.numerology
         << ',' << grid.n_rb() << ',' << fmt("%.6f", grid.duration) << ','
         << (ma.saturation_warning ? 1 : 0) << ',' << (mb.saturation_warning ? 1 : 0) << ','
         << fmt("%.6f", e) << '\n';
  write_text(out / "error.csv", report.str());
  write_manifest({"allocate",
                  {a.trace_a, a.trace_b},
                  {},
                  std::nullopt,
                  a.out_dir,
                  utc_timestamp(),
                  {{"bandwidth_hz", fmt("%.17g", a.bandwidth)},
                   {"mu", std::to_string(a.mu)},
                   {"direction", std::string(to_string(dir))},
                   {"port", std::to_string(a.port)},
                   {"bits_per_rb", fmt("%.17g", grid.bits_per_rb)}}},
                 out);

  for (const auto* m : {&ma, &mb}) {
    if (m->saturation_warning) {
      ctx.err << "xrtg: warning: offered load exceeds grid capacity; backlog left unserved\n";
    }
  }
  ctx.out << "n_rb " << grid.n_rb() << ", e = " << fmt("%.4f", e) << " %\n";
  return 0;
}

}  // namespace

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["inputs"] = m.inputs;
  j["model_ids"] = m.model_ids;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["output_dir"] = m.output_dir;
  j["timestamp"] = m.timestamp;
  nlohmann::ordered_json opts = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.options) opts[k] = v;
  j["options"] = opts;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const fs::path& dir) {
  write_text(dir / "manifest.json", to_json(manifest));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic XR traffic: ingest, fit, generate and compare RAN allocations", "xrtg"};
  app.set_version_flag("--version", "xrtg 0.1.0");
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Extract frame metrics from an RTP/UDP capture");
  ingest->add_option("pcap", ia.pcap, "Capture file")->required();
  ingest->add_option("--port", ia.port, "UDP port of the stream")->capture_default_str();
  ingest->add_option("--gap-threshold", ia.gap_threshold, "Frame split gap (s)")
      ->capture_default_str();
  ingest->add_option("--direction", ia.direction, "uplink or downlink")->capture_default_str();
  ingest->add_option("--out", ia.out_dir, "Output directory")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit distributions to a metrics file");
  fit->add_option("metrics", fa.metrics, "Metrics file from ingest")->required();
  fit->add_option("--families", fa.families, "Comma-separated families")->capture_default_str();
  auto* fit_fps = fit->add_option("--fps", "Nominal frame rate (default: from inter-frame mean)");
  fit->add_option("--id", fa.id, "Stream id (default: metrics file stem)");
  fit->add_option("--jobs", fa.jobs, "Concurrent fits")->capture_default_str();
  fit->add_option("--out", fa.out_dir, "Output directory")->required();

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Synthesize a packet trace");
  auto* gen_model = gen->add_option("--model", ga.model_path, "Model file");
  auto* gen_builtin = gen->add_option("--builtin", ga.builtin_id, "Builtin stream id");
  gen_model->excludes(gen_builtin);
  gen->add_option("--policy", ga.policy, "max, mean or explicit:BYTES");
  gen->add_option("--seed", ga.seed, "RNG seed")->capture_default_str();
  auto* gen_duration = gen->add_option("--duration", "Trace length (s)");
  auto* gen_frames = gen->add_option("--frames", "Number of frames");
  gen_duration->excludes(gen_frames);
  gen->add_option("--pcap-out", ga.pcap_out, "PCAP file (relative to --out)");
  gen->add_option("--report", ga.report, "Throughput CSV (relative to --out)")
      ->capture_default_str();
  gen->add_flag("--norm", ga.norm, "Frame-level Normal baseline instead of the packet model");
  gen->add_option("--stats", ga.stats, "Metrics file supplying the Normal baseline moments");
  auto* gen_ref = gen->add_option("--reference-mbps", "Reference throughput for the report");
  gen->add_option("--port", ga.port, "UDP destination port")->capture_default_str();
  gen->add_option("--snaplen", ga.snaplen, "Stored bytes per packet")->capture_default_str();
  gen->add_flag("--no-ks-warning", ga.no_ks_warning, "Silence the high-KS model warning");
  gen->add_option("--out", ga.out_dir, "Output directory")->required();

  AllocateArgs aa;
  auto* alloc = app.add_subcommand("allocate", "Compare RB allocations of two traces");
  alloc->add_option("--trace-a", aa.trace_a, "Reference capture")->required();
  alloc->add_option("--trace-b", aa.trace_b, "Candidate capture")->required();
  alloc->add_option("--bandwidth", aa.bandwidth, "Channel bandwidth (Hz)")->capture_default_str();
  alloc->add_option("--mu", aa.mu, "Numerology 0..3")->capture_default_str();
  alloc->add_option("--direction", aa.direction, "uplink or downlink")->capture_default_str();
  alloc->add_option("--port", aa.port, "UDP port of both streams")->capture_default_str();
  auto* alloc_bpr = alloc->add_option("--bits-per-rb", "Bits carried by one RB in one slot");
  alloc->add_flag("--matrices", aa.matrices, "Also export sparse allocation matrices");
  alloc->add_option("--out", aa.out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : int(ExitCode::kUsage);
  }

  Context ctx{out, err};
  try {
    if (fit_fps->count()) fa.fps = fit_fps->as<double>();
    if (gen_duration->count()) ga.duration = gen_duration->as<double>();
    if (gen_frames->count()) ga.frames = gen_frames->as<std::int64_t>();
    if (gen_ref->count()) ga.reference_mbps = gen_ref->as<double>();
    if (alloc_bpr->count()) aa.bits_per_rb = alloc_bpr->as<double>();
    if (*ingest) return cmd_ingest(ia, ctx);
    if (*fit) return cmd_fit(fa, ctx);
    if (*gen) return cmd_generate(ga, ctx);
    if (*alloc) return cmd_allocate(aa, ctx);
    return int(ExitCode::kUsage);
  } catch (const Error& e) {
    err << "xrtg: error: " << e.what() << '\n';
    return int(e.exit_code());
  } catch (const CLI::Error& e) {
    err << "xrtg: error: " << e.what() << '\n';
    return int(ExitCode::kUsage);
  } catch (const std::exception& e) {
    err << "xrtg: internal error: " << e.what() << '\n';
    return int(ExitCode::kInternal);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace xrtg::cli
