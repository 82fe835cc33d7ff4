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

#ifndef XRTG_CLI_HPP
#define XRTG_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xrtg::cli {

// Recorded as manifest.json in every output directory.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> model_ids;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::string timestamp;  // UTC, ISO 8601; honours SOURCE_DATE_EPOCH
  std::vector<std::pair<std::string, std::string>> options;
};

std::string to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);
std::string utc_timestamp();

// Runs one subcommand and returns the process exit code. Messages go to
// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xrtg::cli

#endif  // XRTG_CLI_HPP
