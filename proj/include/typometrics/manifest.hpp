// Copyright 2026 The Authors.
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

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "typometrics/error.hpp"
#include "typometrics/text.hpp"

#ifndef TYPOMETRICS_VERSION
#define TYPOMETRICS_VERSION "0.0.0"
#endif

namespace typometrics {

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  text::Fnv1a64 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return "fnv1a64:" + h.hex();
}

// Reproducibility record for one command invocation. Wall time is kept out
// of outputs that must be byte-identical across runs; it only goes into the
// sidecar manifest file.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> input_digests;
  std::optional<std::uint64_t> seed;
  std::string version = TYPOMETRICS_VERSION;
  std::optional<double> wall_time_seconds;

  void add_input(const std::string& path) {
    if (path.empty() || path == "-") return;
    input_digests[path] = file_digest(path);
  }

  nlohmann::json to_json(bool with_wall_time = false) const {
    nlohmann::json j{{"subcommand", subcommand},
                     {"flags", flags},
                     {"input_digests", input_digests},
                     {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                     {"version", version}};
    if (with_wall_time && wall_time_seconds) j["wall_time_seconds"] = *wall_time_seconds;
    return j;
  }
};

}  // namespace typometrics
