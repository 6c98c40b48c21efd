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

#include "svasim/memory.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

#include "svasim/error.hpp"

namespace svasim {

const char* to_string(Source s) {
  switch (s) {
    case Source::Host: return "HOST";
    case Source::Ptw: return "PTW";
    case Source::Dma: return "DMA";
  }
  return "?";
}

namespace {

bool window_contains(Addr base, Addr size, Addr a, std::uint64_t len) {
  return a >= base && a - base <= size && len <= size - (a - base);
}

bool overlaps(Addr a0, Addr s0, Addr a1, Addr s1) { return a0 < a1 + s1 && a1 < a0 + s0; }

}  // namespace

bool AddressMap::mapped(Addr a, std::uint64_t len) const {
  return window_contains(dram_base, dram_size, a, len) ||
         window_contains(dram_base + bypass_offset, dram_size, a, len) ||
         window_contains(spm_base, spm_size, a, len);
}

void AddressMap::validate() const {
  if (dram_size == 0 || spm_size == 0 || dram_size % (2 * kPageSize) != 0)
    throw ConfigError("address map: window sizes must be non-zero and page multiples");
  if (bypass_offset < dram_size)
    throw ConfigError("address map: bypass alias overlaps DRAM (mem.bypass_offset < dram size)");
  if (overlaps(dram_base, dram_size, spm_base, spm_size) ||
      overlaps(dram_base + bypass_offset, dram_size, spm_base, spm_size))
    throw ConfigError("address map: SPM window overlaps DRAM or the bypass alias");
}

void SimMemory::check(Addr addr, std::uint64_t len) const {
  if (!map_.mapped(addr, len)) throw MemoryFault(addr, "access outside mapped windows");
}

void SimMemory::read(Addr addr, std::span<std::uint8_t> out) const {
  if (out.empty()) return;
  check(addr, out.size());
  Addr a = map_.canonical(addr);
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr base = page_base(a);
    const std::size_t off = page_offset(a);
    const std::size_t n = std::min<std::size_t>(kPageSize - off, out.size() - done);
    auto it = pages_.find(base);
    if (it == pages_.end())
      std::memset(out.data() + done, 0, n);
    else
      std::memcpy(out.data() + done, it->second->data() + off, n);
    done += n;
    a += n;
  }
}

void SimMemory::write(Addr addr, std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return;
  check(addr, bytes.size());
  Addr a = map_.canonical(addr);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr base = page_base(a);
    const std::size_t off = page_offset(a);
    const std::size_t n = std::min<std::size_t>(kPageSize - off, bytes.size() - done);
    auto& page = pages_[base];
    if (!page) {
      page = std::make_unique<Page>();
      page->fill(0);
    }
    std::memcpy(page->data() + off, bytes.data() + done, n);
    done += n;
    a += n;
  }
}

std::uint64_t SimMemory::read64(Addr addr) const {
  std::array<std::uint8_t, 8> b{};
  read(addr, b);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void SimMemory::write64(Addr addr, std::uint64_t value) {
  std::array<std::uint8_t, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(value >> (8 * i));
  write(addr, b);
}

void DramTimingConfig::validate() const {
  if (beat_bytes == 0 || (beat_bytes & (beat_bytes - 1)) != 0)
    throw ConfigError("dram.beat_bytes must be a power of two");
}

DramPort::DramPort(DramTimingConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Cycle DramPort::service_time(std::uint32_t len) const {
  const Cycle beats = (len + cfg_.beat_bytes - 1) / cfg_.beat_bytes;
  return cfg_.access_latency + beats * cfg_.beat_cycles;
}

Cycle DramPort::access(MemTransaction& txn, Cycle now) {
  if (txn.len == 0) throw std::logic_error("zero-length DRAM transaction");
  if (page_base(txn.addr) != page_base(txn.addr + txn.len - 1))
    throw std::logic_error("DRAM transaction crosses a 4 KiB boundary at " + hex(txn.addr));
  const Cycle start = std::max(now, busy_until_);
  const Cycle service = service_time(txn.len);
  busy_until_ = start + service;
  txn.issue_time = now;
  txn.complete_time = busy_until_;
  const auto src = static_cast<std::size_t>(txn.source);
  ++stats_.accesses[src];
  stats_.bytes[src] += txn.len;
  stats_.busy_cycles += service;
  return busy_until_;
}

Cycle SpmPort::access(MemTransaction& txn, Cycle now) const {
  txn.issue_time = now;
  txn.complete_time = now + latency_;
  return txn.complete_time;
}

}  // namespace svasim
