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

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <vector>

#include "svasim/pagetable.hpp"

using namespace svasim;

namespace {

MemoryConfig cfg() {
  MemoryConfig c;
  c.dram.access_latency = 200;
  return c;
}

constexpr Addr kRegion = 0x8010'0000;
constexpr Addr kRegionSize = Addr{4} << 20;

// Independent reference walk straight over backing memory words.
std::optional<std::uint64_t> ref_walk(const MemorySystem& m, Addr root, std::uint64_t iova) {
  Addr table = root;
  for (int lvl = 2; lvl >= 0; --lvl) {
    const std::uint64_t idx = (iova >> (12 + 9 * lvl)) & 0x1ff;
    const std::uint64_t e = m.peek64(table + idx * 8);
    if (!(e & 1)) return std::nullopt;
    const std::uint64_t ppn = (e >> 10) & ((1ULL << 44) - 1);
    if (e & 0xe) return (ppn << 12) | (iova & 0xfff);
    table = ppn << 12;
  }
  return std::nullopt;
}

}  // namespace

TEST(Pte, EncodeExample) {
  EXPECT_EQ(pte_encode(0x1234, pte::V | pte::R | pte::W), 0x48D007u);
  const Pte p = pte_decode(0x48D007);
  EXPECT_EQ(p.ppn(), 0x1234u);
  EXPECT_EQ(p.flags(), 7u);
  EXPECT_TRUE(p.valid());
  EXPECT_TRUE(p.leaf());
  EXPECT_FALSE(pte_decode(pte_encode(5, pte::V)).leaf());
}

TEST(Pte, RoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t ppn = rng() & pte::kPpnMask;
    const std::uint64_t flags = rng() & 0xff;
    const Pte p = pte_decode(pte_encode(ppn, flags));
    ASSERT_EQ(p.ppn(), ppn);
    ASSERT_EQ(p.flags(), flags);
  }
}

TEST(IoVirtAddr, Fields) {
  const IoVirtAddr v{0x0'4020'1ABC};
  EXPECT_EQ(v.vpn(2), 1u);
  EXPECT_EQ(v.vpn(1), 1u);
  EXPECT_EQ(v.vpn(0), 1u);
  EXPECT_EQ(v.offset(), 0xABCu);
  EXPECT_TRUE(v.canonical());
  EXPECT_FALSE(IoVirtAddr{1ULL << 38}.canonical());
  EXPECT_TRUE(IoVirtAddr{~0ULL}.canonical());
}

TEST(PageTableSet, FreshMappingWritesThreeEntries) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  const std::uint64_t ppn = 0x81000;
  auto r = pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{ppn}, 0);
  EXPECT_EQ(r.ptes_written, 3u);
  EXPECT_EQ(pt.table_pages().size(), 3u);
  EXPECT_GT(r.done, r.start);
  // Adjacent page: only the leaf.
  auto r2 = pt.map_pages(0x1000'1000, std::vector<std::uint64_t>{ppn + 1}, r.done);
  EXPECT_EQ(r2.ptes_written, 1u);
  EXPECT_EQ(pt.oracle_walk(0x1000'1234).phys, ((ppn + 1) << 12) | 0x234);
}

TEST(PageTableSet, SixteenPagesAcrossTablesWritesEighteen) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  std::vector<std::uint64_t> ppns(16);
  for (std::size_t i = 0; i < ppns.size(); ++i) ppns[i] = 0x90000 + i;
  // Fresh set: 16 leaves + 1 L1 + 1 L2 entry.
  auto r = pt.map_pages(0x2000'0000, ppns, 0);
  EXPECT_EQ(r.ptes_written, 18u);
  EXPECT_EQ(r.page_count, 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    auto w = pt.oracle_walk(0x2000'0000 + i * kPageSize + 8);
    ASSERT_TRUE(w.ok());
    EXPECT_EQ(w.phys, (ppns[i] << 12) + 8);
  }
}

TEST(PageTableSet, LeafFlagsAndEncoding) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{0x81234}, 0);
  const Addr leaf = pt.entry_address(0x1000'0000, 0);
  ASSERT_NE(leaf, 0u);
  const Pte p = pte_decode(m.peek64(leaf));
  EXPECT_EQ(p.flags(), pte::kLeafFlags);
  EXPECT_EQ(p.ppn(), 0x81234u);
  const Pte l2 = pte_decode(m.peek64(pt.entry_address(0x1000'0000, 2)));
  EXPECT_EQ(l2.flags(), pte::V);
  for (Addr t : pt.table_pages()) {
    EXPECT_GE(t, pt.region_begin());
    EXPECT_LT(t, pt.region_end());
    EXPECT_EQ(page_offset(t), 0u);
  }
}

TEST(PageTableSet, Errors) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{0x81000, 0x81001}, 0);
  const auto tables_before = pt.table_pages().size();
  // Overlap on the second page: nothing may be written.
  EXPECT_THROW(pt.map_pages(0x0FFF'F000, std::vector<std::uint64_t>{0x1, 0x2}, 0), MappingExists);
  EXPECT_FALSE(pt.oracle_walk(0x0FFF'F000).ok());
  EXPECT_THROW(pt.map_pages(0x1000'0010, std::vector<std::uint64_t>{0x1}, 0), BadAddress);
  EXPECT_THROW(pt.map_pages(1ULL << 40, std::vector<std::uint64_t>{0x1}, 0), BadAddress);
  EXPECT_THROW(pt.unmap_pages(0x3000'0000, 1, 0), NotMapped);
  EXPECT_THROW(pt.unmap_pages(0x1000'0000, 3, 0), NotMapped);
  EXPECT_TRUE(pt.oracle_walk(0x1000'1000).ok());  // untouched by the failed unmap
  EXPECT_EQ(pt.table_pages().size(), tables_before);
}

TEST(PageTableSet, UnmapClearsLeaves) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{0x81000, 0x81001}, 0);
  pt.unmap_pages(0x1000'0000, 1, 0);
  const auto w = pt.oracle_walk(0x1000'0000);
  EXPECT_EQ(w.fault, WalkFault::NotMapped);
  EXPECT_EQ(w.level, 0);
  EXPECT_TRUE(pt.oracle_walk(0x1000'1000).ok());
  EXPECT_NO_THROW(pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{0x82000}, 0));
}

TEST(PageTableSet, RegionExhaustion) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, 3 * kPageSize);
  pt.map_pages(0x1000'0000, std::vector<std::uint64_t>{1}, 0);
  EXPECT_THROW(pt.map_pages(0x4000'0000, std::vector<std::uint64_t>{2}, 0), PageTableError);
}

// Random map sequences: every mapped page resolves to its physical page via
// an independent walker; every unmapped page faults.
TEST(PageTableSet, RandomMappingsAgreeWithReferenceWalk) {
  MemorySystem m(cfg());
  PageTableSet pt(m, kRegion, kRegionSize);
  std::mt19937_64 rng(9);
  std::map<std::uint64_t, std::uint64_t> ref;  // vpn -> ppn
  Cycle t = 0;
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t vpn = rng() % (1ULL << 20);
    const std::uint64_t n = 1 + rng() % 8;
    bool free = true;
    for (std::uint64_t k = 0; k < n; ++k) free = free && !ref.count(vpn + k);
    std::vector<std::uint64_t> ppns(n);
    for (auto& p : ppns) p = 0x80000 + rng() % 0x40000;
    if (!free) {
      EXPECT_THROW(pt.map_pages(vpn << 12, ppns, t), MappingExists);
      continue;
    }
    t = pt.map_pages(vpn << 12, ppns, t).done;
    for (std::uint64_t k = 0; k < n; ++k) ref[vpn + k] = ppns[k];
  }
  for (auto [vpn, ppn] : ref) {
    const std::uint64_t off = rng() & 0xfff;
    const auto w = ref_walk(m, pt.root(), (vpn << 12) | off);
    ASSERT_TRUE(w);
    EXPECT_EQ(*w, (ppn << 12) | off);
    EXPECT_EQ(pt.oracle_walk((vpn << 12) | off).phys, *w);
  }
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t vpn = rng() % (1ULL << 20);
    if (ref.count(vpn)) continue;
    EXPECT_FALSE(ref_walk(m, pt.root(), vpn << 12));
    EXPECT_FALSE(pt.oracle_walk(vpn << 12).ok());
  }
  // Every table page is distinct.
  std::set<Addr> uniq(pt.table_pages().begin(), pt.table_pages().end());
  EXPECT_EQ(uniq.size(), pt.table_pages().size());
}

TEST(PageTableSet, MapTimeScalesWithLatency) {
  auto time_at = [](Cycle lat) {
    MemoryConfig c;
    c.dram.access_latency = lat;
    c.llc.enabled = false;
    MemorySystem m(c);
    PageTableSet pt(m, kRegion, kRegionSize);
    std::vector<std::uint64_t> ppns(16, 0x81000);
    for (std::size_t i = 0; i < 16; ++i) ppns[i] += i;
    const auto r = pt.map_pages(0x1000'0000, ppns, 0);
    return r.done - r.start;
  };
  EXPECT_LT(time_at(200), time_at(1000));
}
