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
#include <stdexcept>
#include <string>

namespace svasim {

/// Invalid or inconsistent configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fault raised by the simulated hardware (bad address, translation
/// fault). Maps to CLI exit code 3.
class SimFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MemoryFault : public SimFault {
 public:
  explicit MemoryFault(std::uint64_t addr, const std::string& what);
  std::uint64_t addr() const { return addr_; }

 private:
  std::uint64_t addr_;
};

std::string hex(std::uint64_t v);

}  // namespace svasim
