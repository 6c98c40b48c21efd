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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>

#include "svasim/simcore.hpp"

namespace svasim {

using Addr = std::uint64_t;

inline constexpr Addr kPageSize = 4096;
inline constexpr unsigned kPageShift = 12;

inline constexpr Addr page_base(Addr a) { return a & ~(kPageSize - 1); }
inline constexpr Addr page_offset(Addr a) { return a & (kPageSize - 1); }

enum class Kind : std::uint8_t { Read, Write };
enum class Source : std::uint8_t { Host, Ptw, Dma };

const char* to_string(Source s);

/// A timed memory request. Callers split requests so that none crosses a
/// 4 KiB physical boundary.
struct MemTransaction {
  Kind kind = Kind::Read;
  Addr addr = 0;
  std::uint32_t len = 8;
  Source source = Source::Host;
  bool cacheable = false;
  Cycle issue_time = 0;
  Cycle complete_time = 0;
};

/// Platform address windows. DRAM is split into a Linux half (cacheable)
/// and a reserved half for physically contiguous DMA buffers (never
/// cached). The bypass alias window maps one-to-one onto DRAM at a fixed
/// displacement and is routed around the LLC.
struct AddressMap {
  Addr dram_base = 0x8000'0000;
  Addr dram_size = Addr{2} << 30;
  Addr bypass_offset = Addr{2} << 30;
  Addr spm_base = 0x7000'0000;
  Addr spm_size = Addr{1} << 20;

  Addr linux_begin() const { return dram_base; }
  Addr linux_end() const { return dram_base + dram_size / 2; }
  Addr reserved_begin() const { return linux_end(); }
  Addr reserved_end() const { return dram_base + dram_size; }

  bool in_dram(Addr a) const { return a >= dram_base && a - dram_base < dram_size; }
  bool in_linux_half(Addr a) const { return a >= linux_begin() && a < linux_end(); }
  bool in_reserved_half(Addr a) const { return a >= reserved_begin() && a < reserved_end(); }
  bool in_bypass_alias(Addr a) const {
    return a >= dram_base + bypass_offset && a - (dram_base + bypass_offset) < dram_size;
  }
  bool in_spm(Addr a) const { return a >= spm_base && a - spm_base < spm_size; }

  /// Strips the bypass alias; other addresses are returned unchanged.
  Addr canonical(Addr a) const { return in_bypass_alias(a) ? a - bypass_offset : a; }
  Addr bypass_alias(Addr dram_addr) const { return dram_addr + bypass_offset; }

  /// True if [a, a+len) lies in a single mapped window (alias included).
  bool mapped(Addr a, std::uint64_t len) const;

  /// Throws ConfigError if the windows overlap.
  void validate() const;
};

/// Sparse byte-addressable backing store. Untouched bytes read as zero and
/// both the DRAM address and its bypass alias name the same bytes.
class SimMemory {
 public:
  explicit SimMemory(AddressMap map = {}) : map_(map) {}

  void read(Addr addr, std::span<std::uint8_t> out) const;
  void write(Addr addr, std::span<const std::uint8_t> bytes);

  std::uint64_t read64(Addr addr) const;
  void write64(Addr addr, std::uint64_t value);

  const AddressMap& map() const { return map_; }
  std::size_t touched_pages() const { return pages_.size(); }

 private:
  using Page = std::array<std::uint8_t, kPageSize>;
  void check(Addr addr, std::uint64_t len) const;

  AddressMap map_;
  std::unordered_map<Addr, std::unique_ptr<Page>> pages_;
};

struct DramTimingConfig {
  Cycle access_latency = 200;
  std::uint32_t beat_bytes = 8;
  Cycle beat_cycles = 1;

  void validate() const;
};

struct PortStats {
  std::array<std::uint64_t, 3> accesses{};
  std::array<std::uint64_t, 3> bytes{};
  Cycle busy_cycles = 0;
};

/// Single DRAM channel behind the latency delayer. Requests are served in
/// arrival order and occupy the channel from start to completion:
///   start = max(now, busy_until)
///   done  = start + access_latency + ceil(len / beat_bytes) * beat_cycles
class DramPort {
 public:
  explicit DramPort(DramTimingConfig cfg = {});

  /// Returns the completion time. The transaction must not cross a 4 KiB
  /// boundary (std::logic_error otherwise).
  Cycle access(MemTransaction& txn, Cycle now);

  Cycle service_time(std::uint32_t len) const;
  Cycle busy_until() const { return busy_until_; }
  const DramTimingConfig& config() const { return cfg_; }
  const PortStats& stats() const { return stats_; }

 private:
  DramTimingConfig cfg_;
  Cycle busy_until_ = 0;
  PortStats stats_;
};

/// L2 scratchpad: flat latency, no occupancy.
class SpmPort {
 public:
  explicit SpmPort(Cycle latency = 5) : latency_(latency) {}
  Cycle access(MemTransaction& txn, Cycle now) const;
  Cycle latency() const { return latency_; }

 private:
  Cycle latency_;
};

}  // namespace svasim
