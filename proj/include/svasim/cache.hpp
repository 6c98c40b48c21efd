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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "svasim/memory.hpp"

namespace svasim {

enum class ReplPolicy : std::uint8_t { Lru, Fifo };

/// Set-associative tag store with exact LRU (or FIFO) ranks. Rank 0 is the
/// most recently used (or most recently inserted, for FIFO) way; within a
/// set the ranks are always a permutation of 0..ways-1.
class TagArray {
 public:
  struct Way {
    std::uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    unsigned rank = 0;
  };

  TagArray(std::size_t sets, unsigned ways, ReplPolicy policy = ReplPolicy::Lru);

  std::optional<unsigned> find(std::size_t set, std::uint64_t tag) const;
  /// Records a use of `way`. Promotes to rank 0 under LRU; no-op under FIFO.
  void touch(std::size_t set, unsigned way);
  /// Invalid way if one exists, else the highest-ranked (LRU/oldest) way.
  unsigned victim(std::size_t set) const;
  /// Installs `tag` in `way` as the newest entry.
  void install(std::size_t set, unsigned way, std::uint64_t tag);
  void invalidate(std::size_t set, unsigned way);
  void invalidate_all();

  Way& at(std::size_t set, unsigned way) { return ways_[set * nways_ + way]; }
  const Way& at(std::size_t set, unsigned way) const { return ways_[set * nways_ + way]; }
  std::size_t sets() const { return nsets_; }
  unsigned ways() const { return nways_; }
  ReplPolicy policy() const { return policy_; }

 private:
  void promote(std::size_t set, unsigned way);

  std::size_t nsets_;
  unsigned nways_;
  ReplPolicy policy_;
  std::vector<Way> ways_;
};

struct CacheConfig {
  bool enabled = true;
  std::uint64_t capacity = 128 * 1024;
  std::uint32_t line = 64;
  unsigned ways = 8;
  Cycle hit_latency = 5;

  std::size_t sets() const { return capacity / (std::uint64_t{line} * ways); }
  /// Throws ConfigError unless capacity = sets * ways * line with sets a
  /// power of two.
  void validate(const char* what) const;
};

struct CacheStats {
  // Indexed by Source (DMA slots must stay zero for the LLC).
  std::array<std::uint64_t, 3> hits{};
  std::array<std::uint64_t, 3> misses{};
  std::array<std::uint64_t, 3> evictions{};
  std::array<std::uint64_t, 3> writebacks{};

  std::uint64_t total_hits() const { return hits[0] + hits[1] + hits[2]; }
  std::uint64_t total_misses() const { return misses[0] + misses[1] + misses[2]; }
};

/// Shared last-level cache: write-back, write-allocate, exact LRU. Lines
/// carry data, so dirty lines hide newer bytes from anything that reads
/// DRAM directly until they are flushed.
///
/// Timing: the tag/data array is a single port with a reservation calendar.
/// A lookup holds it for hit_latency cycles. A miss writes back a dirty
/// victim, fills the line from DRAM (hits to other lines proceed
/// meanwhile), then holds the array again while the refill beats are
/// written and for one more hit_latency to read the response out.
class Llc {
 public:
  Llc(CacheConfig cfg, DramPort& dram, SimMemory& mem);

  /// Services a line-contained HOST or PTW request. `data` is read into
  /// (READ) or written from (WRITE); it may be empty for timing-only use.
  Cycle access(MemTransaction& txn, std::span<std::uint8_t> data, Cycle now);

  /// Writes back every dirty line and invalidates everything. Returns the
  /// completion time of the last writeback (or `now` when none).
  Cycle flush(Cycle now);

  /// Untimed lookup of resident bytes; returns false if the line is absent.
  bool peek(Addr addr, std::span<std::uint8_t> out) const;

  /// Untimed in-place update of resident bytes (no-op for absent lines).
  void patch(Addr addr, std::span<const std::uint8_t> bytes);

  bool contains(Addr addr) const;
  bool dirty(Addr addr) const;
  std::size_t resident_lines() const;

  const CacheConfig& config() const { return cfg_; }
  const CacheStats& stats() const { return stats_; }
  const TagArray& tags() const { return tags_; }
  /// Cycles the array port has been reserved for, over the cache lifetime.
  Cycle port_busy_cycles() const { return port_cycles_; }

 private:
  std::size_t set_of(Addr a) const { return (a / cfg_.line) & (tags_.sets() - 1); }
  std::uint64_t tag_of(Addr a) const { return a / cfg_.line / tags_.sets(); }
  Addr line_addr(std::size_t set, std::uint64_t tag) const {
    return (tag * tags_.sets() + set) * cfg_.line;
  }
  std::uint8_t* line_data(std::size_t set, unsigned way) {
    return data_.data() + (set * tags_.ways() + way) * cfg_.line;
  }
  const std::uint8_t* line_data(std::size_t set, unsigned way) const {
    return data_.data() + (set * tags_.ways() + way) * cfg_.line;
  }
  Cycle writeback(std::size_t set, unsigned way, Source src, Cycle now);
  /// Earliest start >= `at` with `len` free cycles; books and returns it.
  Cycle reserve(Cycle at, Cycle len);

  CacheConfig cfg_;
  DramPort& dram_;
  SimMemory& mem_;
  TagArray tags_;
  std::vector<std::uint8_t> data_;
  CacheStats stats_;
  std::map<Cycle, Cycle> busy_;  // start -> end of booked port intervals
  Cycle port_cycles_ = 0;
};

/// Host L1 data cache: write-through, no write-allocate, tags only (the
/// backing levels always hold current bytes).
class DCache {
 public:
  explicit DCache(CacheConfig cfg);

  /// Read lookup; allocates on miss. Returns true on hit.
  bool read_lookup(Addr addr);
  /// Write lookup; never allocates. Returns true on hit.
  bool write_lookup(Addr addr);
  /// Number of lines that were valid (all clean).
  std::size_t invalidate_all();

  const CacheConfig& config() const { return cfg_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  CacheConfig cfg_;
  TagArray tags_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

enum class Route : std::uint8_t { DCacheLlc, DCacheDram, Llc, Dram, Spm };

const char* to_string(Route r);

struct MemoryConfig {
  AddressMap map;
  DramTimingConfig dram;
  Cycle spm_latency = 5;
  CacheConfig llc;
  CacheConfig dcache{true, 32 * 1024, 64, 8, 1};
};

/// The host/PTW/DMA view of the platform memory path: D-cache, shared LLC,
/// SPM and the DRAM channel, wired according to the routing rules.
class MemorySystem {
 public:
  explicit MemorySystem(MemoryConfig cfg);

  /// Path taken by a request from `source` at `addr`:
  ///   DMA, reserved half, bypass alias -> DRAM direct
  ///   PTW                              -> LLC (DRAM if the LLC is off)
  ///   HOST in the Linux half           -> D-cache, then LLC or DRAM
  Route route(Addr addr, Source source) const;
  bool cacheable(Addr addr, Source source) const;

  /// Timed host accesses (blocking; sequential per line).
  Cycle host_read(Addr addr, std::span<std::uint8_t> out, Cycle now);
  Cycle host_write(Addr addr, std::span<const std::uint8_t> bytes, Cycle now);
  Cycle host_read64(Addr addr, std::uint64_t& value, Cycle now);
  Cycle host_write64(Addr addr, std::uint64_t value, Cycle now);

  /// One 8-byte page-table read from the IOMMU walker.
  Cycle ptw_read64(Addr addr, std::uint64_t& value, Cycle now);

  /// One DMA burst, always DRAM direct (alias stripped). Must not cross a
  /// 4 KiB boundary.
  Cycle dma_read(Addr addr, std::span<std::uint8_t> out, Cycle now);
  Cycle dma_write(Addr addr, std::span<const std::uint8_t> bytes, Cycle now);

  Cycle flush_llc(Cycle now);
  /// Invalidates the write-through D-cache; charged one cycle per line.
  Cycle flush_dcache(Cycle now);

  /// Untimed, coherent view (LLC contents take precedence over DRAM).
  void peek(Addr addr, std::span<std::uint8_t> out) const;
  std::uint64_t peek64(Addr addr) const;
  /// Untimed write (loader/test setup). Updates backing memory and any
  /// resident LLC copy, leaving dirty state untouched.
  void poke(Addr addr, std::span<const std::uint8_t> bytes);

  const MemoryConfig& config() const { return cfg_; }
  const AddressMap& map() const { return cfg_.map; }
  SimMemory& memory() { return mem_; }
  const SimMemory& memory() const { return mem_; }
  DramPort& dram() { return dram_; }
  const DramPort& dram() const { return dram_; }
  Llc& llc() { return llc_; }
  const Llc& llc() const { return llc_; }
  DCache& dcache() { return dcache_; }
  const DCache& dcache() const { return dcache_; }
  bool llc_enabled() const { return cfg_.llc.enabled; }

 private:
  Cycle line_access(Kind kind, Addr addr, std::span<std::uint8_t> data, Source src, Cycle now);
  Cycle direct(Kind kind, Addr addr, std::span<std::uint8_t> data, Source src, Cycle now);

  MemoryConfig cfg_;
  SimMemory mem_;
  DramPort dram_;
  SpmPort spm_;
  Llc llc_;
  DCache dcache_;
};

}  // namespace svasim
