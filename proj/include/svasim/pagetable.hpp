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
#include <span>
#include <string>
#include <vector>

#include "svasim/cache.hpp"
#include "svasim/error.hpp"

namespace svasim {

namespace pte {
inline constexpr std::uint64_t V = 1u << 0;
inline constexpr std::uint64_t R = 1u << 1;
inline constexpr std::uint64_t W = 1u << 2;
inline constexpr std::uint64_t X = 1u << 3;
inline constexpr std::uint64_t U = 1u << 4;
inline constexpr std::uint64_t G = 1u << 5;
inline constexpr std::uint64_t A = 1u << 6;
inline constexpr std::uint64_t D = 1u << 7;
inline constexpr std::uint64_t kFlagMask = 0xff;
inline constexpr std::uint64_t kLeafFlags = V | R | W | U | A | D;
inline constexpr unsigned kPpnShift = 10;
inline constexpr std::uint64_t kPpnMask = (std::uint64_t{1} << 44) - 1;
}  // namespace pte

/// Sv39 page-table entry.
struct Pte {
  std::uint64_t raw = 0;

  static Pte encode(std::uint64_t ppn, std::uint64_t flags);

  bool valid() const { return raw & pte::V; }
  bool leaf() const { return raw & (pte::R | pte::W | pte::X); }
  std::uint64_t ppn() const { return (raw >> pte::kPpnShift) & pte::kPpnMask; }
  std::uint64_t flags() const { return raw & pte::kFlagMask; }
};

/// Throws std::logic_error if ppn >= 2^44 or flags has bits above 7.
std::uint64_t pte_encode(std::uint64_t ppn, std::uint64_t flags);
inline Pte pte_decode(std::uint64_t raw) { return Pte{raw}; }

/// Sv39 IO-virtual address helpers.
struct IoVirtAddr {
  std::uint64_t addr = 0;

  /// Bits 63:39 must all equal bit 38.
  bool canonical() const;
  /// Index into the level-`level` table (2 = root).
  unsigned vpn(unsigned level) const { return (addr >> (12 + 9 * level)) & 0x1ff; }
  std::uint64_t vpn_full() const { return (addr >> 12) & ((std::uint64_t{1} << 27) - 1); }
  std::uint64_t offset() const { return addr & 0xfff; }
};

class PageTableError : public SimFault {
 public:
  using SimFault::SimFault;
};
class MappingExists : public PageTableError {
 public:
  using PageTableError::PageTableError;
};
class BadAddress : public PageTableError {
 public:
  using PageTableError::PageTableError;
};
class NotMapped : public PageTableError {
 public:
  using PageTableError::PageTableError;
};

struct MappingRecord {
  std::uint64_t iova_base = 0;
  Addr phys_base = 0;  // physical address of the first page
  std::uint64_t page_count = 0;
  std::uint64_t ptes_written = 0;
  Cycle start = 0;
  Cycle done = 0;
};

enum class WalkFault : std::uint8_t { None, NotMapped, NotCanonical };

const char* to_string(WalkFault f);

struct WalkResult {
  WalkFault fault = WalkFault::None;
  Addr phys = 0;
  int level = -1;  // level of the offending entry on NotMapped
  bool ok() const { return fault == WalkFault::None; }
};

/// A three-level Sv39 table tree living in simulated memory. Table pages are
/// bump-allocated from a dedicated region of the Linux half; all PTE loads
/// and stores made by map/unmap go through the timed host path.
class PageTableSet {
 public:
  PageTableSet(MemorySystem& mem, Addr region_base, Addr region_size);

  std::uint64_t root_ppn() const { return root_ >> kPageShift; }
  Addr root() const { return root_; }

  /// Maps IOVA-contiguous pages onto the given physical page numbers,
  /// starting at `now`. Validates the whole range before any store is made.
  MappingRecord map_pages(std::uint64_t iova, std::span<const std::uint64_t> ppns, Cycle now);

  /// Zeroes `count` leaves. Intermediate tables are kept.
  Cycle unmap_pages(std::uint64_t iova, std::uint64_t count, Cycle now);

  /// Untimed reference walk over the coherent memory view. Never throws.
  WalkResult oracle_walk(std::uint64_t iova) const;

  /// Physical address of the level-`level` entry for `iova`, or 0 if the
  /// walk does not reach that level.
  Addr entry_address(std::uint64_t iova, unsigned level) const;

  const std::vector<Addr>& table_pages() const { return tables_; }
  Addr region_begin() const { return region_base_; }
  Addr region_end() const { return region_base_ + region_size_; }
  std::uint64_t total_ptes_written() const { return ptes_written_; }

 private:
  Addr allocate_table();
  void check_iova(std::uint64_t iova) const;

  MemorySystem& mem_;
  Addr region_base_;
  Addr region_size_;
  Addr cursor_;
  Addr root_;
  std::vector<Addr> tables_;
  std::uint64_t ptes_written_ = 0;
};

}  // namespace svasim
