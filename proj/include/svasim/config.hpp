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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svasim {

/// Flat `section.key = value` configuration. Blank lines and `#` comments
/// are ignored; unknown keys are rejected so typos fail loudly.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Applies every entry of `other` on top of this one.
  void merge(const KeyValueConfig& other);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& def) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key, const std::vector<std::uint64_t>& def) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> entries_;
};

bool is_known_key(const std::string& key);
const std::vector<std::string>& known_keys();

std::uint64_t parse_u64(const std::string& text, const std::string& what);
double parse_double(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text);

}  // namespace svasim
