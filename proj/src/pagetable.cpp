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

#include "svasim/pagetable.hpp"

#include <array>
#include <stdexcept>

namespace svasim {

std::uint64_t pte_encode(std::uint64_t ppn, std::uint64_t flags) {
  if (ppn > pte::kPpnMask) throw std::logic_error("ppn exceeds 44 bits");
  if (flags & ~pte::kFlagMask) throw std::logic_error("PTE flags above bit 7");
  return (ppn << pte::kPpnShift) | flags;
}

Pte Pte::encode(std::uint64_t ppn, std::uint64_t flags) { return Pte{pte_encode(ppn, flags)}; }

bool IoVirtAddr::canonical() const {
  const std::uint64_t upper = addr >> 38;  // bits 63:38
  return upper == 0 || upper == (std::uint64_t{1} << 26) - 1;
}

const char* to_string(WalkFault f) {
  switch (f) {
    case WalkFault::None: return "none";
    case WalkFault::NotMapped: return "not-mapped";
    case WalkFault::NotCanonical: return "not-canonical";
  }
  return "?";
}

PageTableSet::PageTableSet(MemorySystem& mem, Addr region_base, Addr region_size)
    : mem_(mem), region_base_(region_base), region_size_(region_size), cursor_(region_base) {
  if (page_offset(region_base) != 0 || region_size < kPageSize ||
      !mem.map().in_linux_half(region_base) || !mem.map().in_linux_half(region_base + region_size - 1))
    throw ConfigError("page-table region must be page aligned inside the Linux half");
  root_ = allocate_table();
}

Addr PageTableSet::allocate_table() {
  if (cursor_ + kPageSize > region_base_ + region_size_)
    throw PageTableError("page-table region exhausted at " + hex(cursor_));
  const Addr page = cursor_;
  cursor_ += kPageSize;
  static const std::array<std::uint8_t, kPageSize> zeros{};
  mem_.poke(page, zeros);
  tables_.push_back(page);
  return page;
}

void PageTableSet::check_iova(std::uint64_t iova) const {
  if (!IoVirtAddr{iova}.canonical()) throw BadAddress("non-canonical IOVA " + hex(iova));
  if (page_offset(iova) != 0) throw BadAddress("IOVA not page aligned: " + hex(iova));
}

MappingRecord PageTableSet::map_pages(std::uint64_t iova, std::span<const std::uint64_t> ppns, Cycle now) {
  check_iova(iova);
  if (!ppns.empty()) check_iova(iova + (ppns.size() - 1) * kPageSize);
  // Validate first so a failing call leaves the tables untouched.
  for (std::size_t i = 0; i < ppns.size(); ++i) {
    const std::uint64_t va = iova + i * kPageSize;
    Addr table = root_;
    for (int level = 2; level >= 0; --level) {
      const Pte e{mem_.peek64(table + 8 * IoVirtAddr{va}.vpn(level))};
      if (!e.valid()) break;
      if (e.leaf()) throw MappingExists("IOVA already mapped: " + hex(va));
      table = e.ppn() << kPageShift;
    }
    if (ppns[i] > pte::kPpnMask) throw BadAddress("ppn out of range for " + hex(va));
  }

  MappingRecord rec{iova, ppns.empty() ? 0 : ppns[0] << kPageShift, ppns.size(), 0, now, now};
  Cycle t = now;
  for (std::size_t i = 0; i < ppns.size(); ++i) {
    const IoVirtAddr va{iova + i * kPageSize};
    Addr table = root_;
    for (unsigned level = 2; level > 0; --level) {
      const Addr slot = table + 8 * va.vpn(level);
      std::uint64_t raw = 0;
      t = mem_.host_read64(slot, raw, t);
      Pte e{raw};
      if (!e.valid()) {
        const Addr next = allocate_table();
        e = Pte::encode(next >> kPageShift, pte::V);
        t = mem_.host_write64(slot, e.raw, t);
        ++rec.ptes_written;
      }
      table = e.ppn() << kPageShift;
    }
    t = mem_.host_write64(table + 8 * va.vpn(0), pte_encode(ppns[i], pte::kLeafFlags), t);
    ++rec.ptes_written;
  }
  rec.done = t;
  ptes_written_ += rec.ptes_written;
  return rec;
}

Cycle PageTableSet::unmap_pages(std::uint64_t iova, std::uint64_t count, Cycle now) {
  check_iova(iova);
  std::vector<Addr> leaves;
  leaves.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t va = iova + i * kPageSize;
    const Addr slot = entry_address(va, 0);
    if (slot == 0 || !Pte{mem_.peek64(slot)}.valid()) throw NotMapped("IOVA not mapped: " + hex(va));
    leaves.push_back(slot);
  }
  for (Addr slot : leaves) {
    now = mem_.host_write64(slot, 0, now);
    ++ptes_written_;
  }
  return now;
}

Addr PageTableSet::entry_address(std::uint64_t iova, unsigned level) const {
  const IoVirtAddr va{iova};
  Addr table = root_;
  for (unsigned l = 2;; --l) {
    const Addr slot = table + 8 * va.vpn(l);
    if (l == level) return slot;
    const Pte e{mem_.peek64(slot)};
    if (!e.valid() || e.leaf()) return 0;
    table = e.ppn() << kPageShift;
  }
}

WalkResult PageTableSet::oracle_walk(std::uint64_t iova) const {
  const IoVirtAddr va{iova};
  if (!va.canonical()) return {WalkFault::NotCanonical, 0, -1};
  Addr table = root_;
  for (int level = 2; level >= 0; --level) {
    Pte e;
    try {
      e.raw = mem_.peek64(table + 8 * va.vpn(level));
    } catch (const MemoryFault&) {
      return {WalkFault::NotMapped, 0, level};
    }
    if (!e.valid()) return {WalkFault::NotMapped, 0, level};
    if (e.leaf()) {
      if (level != 0) return {WalkFault::NotMapped, 0, level};  // no superpages
      return {WalkFault::None, (e.ppn() << kPageShift) | va.offset(), 0};
    }
    if (level == 0) return {WalkFault::NotMapped, 0, 0};
    table = e.ppn() << kPageShift;
  }
  return {WalkFault::NotMapped, 0, 0};
}

}  // namespace svasim
