// Copyright 2026 The svasim Authors.
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

#include "svasim/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "svasim/error.hpp"

namespace svasim {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "dram.latency_cycles", "dram.beat_bytes",     "mem.bypass_offset",    "mem.spm_latency",
      "llc.enabled",         "llc.capacity",        "llc.ways",             "llc.line",
      "llc.hit_latency",     "dcache.capacity",     "iommu.enabled",        "iommu.iotlb_entries",
      "iommu.iotlb_policy",  "iommu.hit_latency",   "dma.max_burst_bytes",  "kernel.name",
      "kernel.size",         "kernel.tile",         "calib.eta_gemm",       "calib.eta_gesummv",
      "calib.eta_heat3d",    "calib.eta_axpy",      "calib.eta_mergesort",  "calib.ioctl_cycles",
      "interference.enabled", "interference.period", "interference.seed",   "offload.sync_cycles",
      "host.cycles_per_flop", "sim.seed",           "sim.mode",             "sim.offload",
      "sweep.kernels",       "sweep.latencies",     "sweep.modes",          "sweep.threads",
  };
  return keys;
}

bool is_known_key(const std::string& key) {
  const auto& k = known_keys();
  return std::find(k.begin(), k.end(), key) != k.end();
}

namespace {
std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}
}  // namespace

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-') throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 0);
  if (errno != 0 || end == t.c_str() || *end != '\0')
    throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || errno != 0 || *end != '\0') throw ConfigError(what + ": expected a number, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw ConfigError(what + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
  KeyValueConfig cfg;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string l = trim(line);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(l).substr(0, eq));
    const std::string value = trim(std::string_view(l).substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  entries_[key] = value;
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& def) const {
  return get(key).value_or(def);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t def) const {
  auto v = get(key);
  return v ? parse_u64(*v, key) : def;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : def;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  auto v = get(key);
  return v ? parse_bool(*v, key) : def;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key, const std::vector<std::string>& def) const {
  auto v = get(key);
  return v ? split_list(*v) : def;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64_list(const std::string& key,
                                                        const std::vector<std::uint64_t>& def) const {
  auto v = get(key);
  if (!v) return def;
  std::vector<std::uint64_t> out;
  for (const auto& s : split_list(*v)) out.push_back(parse_u64(s, key));
  return out;
}

std::string KeyValueConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace svasim
